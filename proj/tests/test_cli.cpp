#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "magpol/cli.hpp"
#include "magpol/grid_io.hpp"
#include "magpol/spectrum.hpp"

using namespace magpol;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "magpol_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const auto path = dir / "config.json";
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << "\n";
    return path;
}

json simulate_config() {
    return json{
        {"model",
         {{"f_p_GHz", 5.041},
          {"gamma_GHz_per_T", 28.0},
          {"mu0_Meff_mT", 1108.0},
          {"G_eff_MHz", 512.3},
          {"variant", "dicke"}}},
        {"field_grid", {{"start_mT", 5.0}, {"stop_mT", 145.0}, {"count", 15}}},
        {"freq_grid", {{"start_GHz", 4.2}, {"stop_GHz", 6.0}, {"count", 121}}},
        {"resonator",
         {{"f_r_GHz", 5.041}, {"Q_int", 10000.0}, {"Q_ext_mag", 5625.0}, {"phi_rad", 0.05}}},
        {"damping", {{"kappa_p_MHz", 0.53}, {"kappa_m_MHz", 461.0}}},
        {"noise", {{"snr_dB", 38.0}}},
        {"seed", 42}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("simulate writes a self-consistent, re-readable bundle") {
    const auto dir = fresh_dir("sim_basic");
    const auto cfg = write_config(dir, simulate_config());
    const auto out = dir / "out";
    CHECK(cli::cmd_simulate(cfg.string(), out.string()) == 0);

    // the emitted grid reloads through the library reader
    const auto grid = read_grid(out / "s21_grid");
    CHECK(grid.rows() == 15);
    CHECK(grid.cols() == 121);
    CHECK(grid.kind == SpectrumGrid::Kind::magnitude);
    REQUIRE(grid.reference_field.has_value());
    CHECK(*grid.reference_field == doctest::Approx(5e-3).epsilon(1e-12));

    // the emitted point table reloads and covers both branches per field
    const auto rows = read_points_csv(out / "points.csv");
    CHECK(rows.size() == 30);

    const json meta = json::parse(slurp(out / "metadata.json"));
    CHECK(meta["command"] == "simulate");
    CHECK(meta["seed"] == 42);
}

TEST_CASE("simulate output is byte-identical across runs") {
    const auto dir = fresh_dir("sim_repeat");
    const auto cfg = write_config(dir, simulate_config());
    const auto out_a = dir / "a";
    const auto out_b = dir / "b";
    REQUIRE(cli::cmd_simulate(cfg.string(), out_a.string()) == 0);
    REQUIRE(cli::cmd_simulate(cfg.string(), out_b.string()) == 0);
    for (const char* name :
         {"s21_grid.csv", "s21_grid.meta.json", "dispersion.csv", "points.csv", "metadata.json"}) {
        INFO(name);
        CHECK(slurp(out_a / name) == slurp(out_b / name));
    }
}

TEST_CASE("seed override changes the noise draw but nothing else") {
    const auto dir = fresh_dir("sim_seed");
    const auto cfg = write_config(dir, simulate_config());
    const auto out_a = dir / "a";
    const auto out_b = dir / "b";
    cli::Overrides other_seed;
    other_seed.seed = 43;
    REQUIRE(cli::cmd_simulate(cfg.string(), out_a.string()) == 0);
    REQUIRE(cli::cmd_simulate(cfg.string(), out_b.string(), other_seed) == 0);
    CHECK(slurp(out_a / "s21_grid.csv") != slurp(out_b / "s21_grid.csv"));
    CHECK(slurp(out_a / "dispersion.csv") == slurp(out_b / "dispersion.csv"));
}

TEST_CASE("unknown config keys are rejected with exit code 2") {
    const auto dir = fresh_dir("sim_badkey");
    json bad = simulate_config();
    bad["model"]["f_p_Ghz"] = 5.0; // wrong capitalization must not pass silently
    const auto cfg = write_config(dir, bad);
    CHECK(cli::cmd_simulate(cfg.string(), (dir / "out").string()) == 2);
}

TEST_CASE("missing required blocks are config errors") {
    const auto dir = fresh_dir("sim_missing");
    json cfg_json = simulate_config();
    cfg_json.erase("freq_grid");
    const auto cfg = write_config(dir, cfg_json);
    CHECK(cli::cmd_simulate(cfg.string(), (dir / "out").string()) == 2);
}

TEST_CASE("malformed JSON is a config error, not a crash") {
    const auto dir = fresh_dir("sim_badjson");
    const auto path = dir / "config.json";
    {
        std::ofstream out(path, std::ios::binary);
        out << "{\"model\": }";
    }
    CHECK(cli::cmd_simulate(path.string(), (dir / "out").string()) == 2);
}

TEST_CASE("simulate then fit recovers the generating parameters") {
    const auto dir = fresh_dir("roundtrip");
    json sim = simulate_config();
    sim.erase("noise"); // clean dispersion for a tight round trip
    const auto sim_cfg = write_config(dir, sim);
    const auto sim_out = dir / "sim";
    REQUIRE(cli::cmd_simulate(sim_cfg.string(), sim_out.string()) == 0);

    json fit_cfg_json{
        {"model",
         {{"f_p_GHz", 5.041},
          {"gamma_GHz_per_T", 28.0},
          {"mu0_Meff_mT", 1108.0},
          {"G_eff_MHz", 512.3},
          {"variant", "dicke"}}},
        {"fit", {{"kind", "dispersion"}, {"points_csv", (sim_out / "points.csv").string()}}}};
    const auto fit_dir = fresh_dir("roundtrip_fit");
    const auto fit_cfg = write_config(fit_dir, fit_cfg_json);
    const auto fit_out = fit_dir / "out";
    CHECK(cli::cmd_fit(fit_cfg.string(), fit_out.string()) == 0);

    const json result = json::parse(slurp(fit_out / "fit_result.json"));
    CHECK(result["converged"] == true);
    double f_p = 0.0, g_eff = 0.0;
    for (const auto& p : result["parameters"]) {
        if (p["name"] == "f_p") f_p = p["value"].get<double>();
        if (p["name"] == "G_eff") g_eff = p["value"].get<double>();
    }
    CHECK(f_p == doctest::Approx(5.041e9).epsilon(1e-6));
    CHECK(g_eff == doctest::Approx(512.3e6).epsilon(1e-5));
    CHECK(fs::exists(fit_out / "residuals.csv"));
}

TEST_CASE("fit on an empty point table names the input file") {
    const auto dir = fresh_dir("fit_empty");
    const auto points = dir / "points.csv";
    {
        std::ofstream out(points, std::ios::binary);
        out << "mu0_H_mT,f_GHz,branch,hwhm_MHz\n";
    }
    json cfg_json{{"model", {{"f_p_GHz", 5.041}, {"gamma_GHz_per_T", 28.0}}},
                  {"fit", {{"kind", "dispersion"}, {"points_csv", points.string()}}}};
    const auto cfg = write_config(dir, cfg_json);
    CHECK(cli::cmd_fit(cfg.string(), (dir / "out").string()) == 2);
}

TEST_CASE("fit reports malformed CSV rows with their line number") {
    const auto dir = fresh_dir("fit_malformed");
    const auto points = dir / "points.csv";
    {
        std::ofstream out(points, std::ios::binary);
        out << "mu0_H_mT,f_GHz,branch,hwhm_MHz\n10,4.4,lower,\n20,oops,upper,\n";
    }
    json cfg_json{{"model", {{"f_p_GHz", 5.041}, {"gamma_GHz_per_T", 28.0}}},
                  {"fit", {{"kind", "dispersion"}, {"points_csv", points.string()}}}};
    const auto cfg = write_config(dir, cfg_json);
    CHECK(cli::cmd_fit(cfg.string(), (dir / "out").string()) == 2);
}

TEST_CASE("report emits the coupling diagnostics") {
    const auto dir = fresh_dir("report");
    json cfg_json{{"model",
                   {{"f_p_GHz", 5.041},
                    {"gamma_GHz_per_T", 28.0},
                    {"mu0_Meff_mT", 1108.0},
                    {"G_eff_MHz", 512.3},
                    {"variant", "hopfield"},
                    {"beta_rad2_per_s2", 4.89e17}}},
                  {"damping", {{"kappa_p_MHz", 0.53}, {"kappa_m_MHz", 461.0}}},
                  {"report", {{"f_m_GHz", 5.041}}}};
    const auto cfg = write_config(dir, cfg_json);
    const auto out = dir / "out";
    CHECK(cli::cmd_report(cfg.string(), out.string()) == 0);
    const json report = json::parse(slurp(out / "report.json"));
    CHECK(report["eta"].get<double>() == doctest::Approx(0.10162666137671097).epsilon(1e-9));
    CHECK(report["ultrastrong"] == true);
    CHECK(report["D_MHz"].get<double>() == doctest::Approx(2.4571542750001573).epsilon(1e-9));
    CHECK(report["B"].get<double>() == doctest::Approx(0.04719548035094739).epsilon(1e-9));
    CHECK(report["G_c_GHz"].get<double>() == doctest::Approx(2.582169800020463).epsilon(1e-9));
    CHECK(report["G_c_over_G_eff"].get<double>() ==
          doctest::Approx(5.040347062308146).epsilon(1e-9));
    CHECK(report["regime"] == "strong");
}

TEST_CASE("report surfaces the no-go breach as a runtime failure") {
    const auto dir = fresh_dir("report_nogo");
    // tiny coupling with a large quadratic term: D exceeds the sum-rule bound
    json cfg_json{{"model",
                   {{"f_p_GHz", 5.041},
                    {"gamma_GHz_per_T", 28.0},
                    {"mu0_Meff_mT", 1108.0},
                    {"G_eff_MHz", 10.0},
                    {"variant", "hopfield"},
                    {"beta_rad2_per_s2", 4.89e17}}},
                  {"report", {{"f_m_GHz", 5.041}}}};
    const auto cfg = write_config(dir, cfg_json);
    const auto out = dir / "out";
    CHECK(cli::cmd_report(cfg.string(), out.string()) == 1);
    const json report = json::parse(slurp(out / "report.json"));
    CHECK(report["B"].get<double>() >= 1.0);
    CHECK(report.contains("no_go"));
}

TEST_CASE("bloch-siegert sweep writes shifts and the scaling fit") {
    const auto dir = fresh_dir("bs");
    json cfg_json{{"model",
                   {{"f_p_GHz", 5.041},
                    {"gamma_GHz_per_T", 28.0},
                    {"mu0_Meff_mT", 1108.0},
                    {"G_eff_MHz", 512.3},
                    {"variant", "dicke"}}},
                  {"field_grid", {{"start_mT", 20.0}, {"stop_mT", 145.0}, {"count", 10}}},
                  {"bloch_siegert",
                   {{"scaling_branch", "lower"},
                    {"couplings",
                     json::array({{{"n", 1.0}, {"G_eff_MHz", 111.8}},
                                  {{"n", 4.0}, {"G_eff_MHz", 223.6}},
                                  {{"n", 16.0}, {"G_eff_MHz", 447.2}},
                                  {{"n", 26.0}, {"G_eff_MHz", 570.1}}})}}}};
    const auto cfg = write_config(dir, cfg_json);
    const auto out = dir / "out";
    CHECK(cli::cmd_bloch_siegert(cfg.string(), out.string()) == 0);

    const std::string csv = slurp(out / "bloch_siegert.csv");
    CHECK(csv.find("supercritical") == std::string::npos);
    CHECK(csv.find("ok") != std::string::npos);

    const json scaling = json::parse(slurp(out / "bs_scaling.json"));
    REQUIRE(scaling["fits"].size() == 1);
    const auto& fit = scaling["fits"][0];
    CHECK(fit["identifiable"] == true);
    CHECK(fit["slope"].get<double>() < 0.0); // lower-branch shift grows downward
    CHECK(fit["r_squared"].get<double>() > 0.99);
}

TEST_CASE("supercritical rows are marked and the exit code reports them") {
    const auto dir = fresh_dir("bs_super");
    json cfg_json{{"model",
                   {{"f_p_GHz", 5.041},
                    {"gamma_GHz_per_T", 28.0},
                    {"mu0_Meff_mT", 1108.0},
                    {"G_eff_MHz", 2700.0}, // above the resonant critical coupling
                    {"variant", "dicke"}}},
                  {"field_grid", {{"start_mT", 5.0}, {"stop_mT", 145.0}, {"count", 12}}}};
    const auto cfg = write_config(dir, cfg_json);
    const auto out = dir / "out";
    CHECK(cli::cmd_bloch_siegert(cfg.string(), out.string()) == 1);
    const std::string csv = slurp(out / "bloch_siegert.csv");
    CHECK(csv.find("supercritical") != std::string::npos);
}

TEST_CASE("the co-rotating variant cannot run a counter-rotating sweep") {
    const auto dir = fresh_dir("bs_rwa");
    json cfg_json{{"model",
                   {{"f_p_GHz", 5.041},
                    {"gamma_GHz_per_T", 28.0},
                    {"mu0_Meff_mT", 1108.0},
                    {"G_eff_MHz", 512.3},
                    {"variant", "rwa"}}},
                  {"field_grid", {{"start_mT", 20.0}, {"stop_mT", 145.0}, {"count", 5}}}};
    const auto cfg = write_config(dir, cfg_json);
    CHECK(cli::cmd_bloch_siegert(cfg.string(), (dir / "out").string()) == 2);
}

TEST_CASE("scaling command fits alpha and infers the single-spin coupling") {
    const auto dir = fresh_dir("scaling");
    json samples = json::array();
    for (const int n : {1, 2, 4, 9, 16, 26})
        samples.push_back({{"n", n}, {"epsilon_sqrt_Hz", 1520.0 * std::sqrt(double(n))}});
    json cfg_json{{"model",
                   {{"f_p_GHz", 5.041},
                    {"gamma_GHz_per_T", 28.0},
                    {"mu0_Meff_mT", 1108.0},
                    {"g_s_Hz", 28.4},
                    {"N", 1.55e13},
                    {"variant", "dicke"}}},
                  {"scaling", {{"samples", samples}}}};
    const auto cfg = write_config(dir, cfg_json);
    const auto out = dir / "out";
    CHECK(cli::cmd_scaling(cfg.string(), out.string()) == 0);
    const json result = json::parse(slurp(out / "scaling.json"));
    CHECK(result["alpha_sqrt_Hz"].get<double>() == doctest::Approx(1520.0).epsilon(1e-12));
    CHECK(result["identifiable"] == true);
    CHECK(result["g_s_Hz"].get<double>() ==
          doctest::Approx(27.411707411721117).epsilon(1e-9));
}

TEST_CASE("degenerate scaling samples exit nonzero but still write the fit") {
    const auto dir = fresh_dir("scaling_degenerate");
    json samples = json::array();
    samples.push_back({{"n", 4}, {"epsilon_sqrt_Hz", 3000.0}});
    samples.push_back({{"n", 4}, {"epsilon_sqrt_Hz", 3100.0}});
    json cfg_json{{"model", {{"f_p_GHz", 5.041}, {"gamma_GHz_per_T", 28.0}}},
                  {"scaling", {{"samples", samples}}}};
    const auto cfg = write_config(dir, cfg_json);
    const auto out = dir / "out";
    CHECK(cli::cmd_scaling(cfg.string(), out.string()) == 1);
    const json result = json::parse(slurp(out / "scaling.json"));
    CHECK(result["identifiable"] == false);
}
