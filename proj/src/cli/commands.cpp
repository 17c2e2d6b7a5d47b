#include "magpol/cli.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magpol/errors.hpp"
#include "magpol/estimation.hpp"
#include "magpol/grid_io.hpp"
#include "magpol/open_system.hpp"
#include "magpol/polariton.hpp"
#include "magpol/spectrum.hpp"
#include "run_config.hpp"
#include "svg_plot.hpp"

namespace magpol::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// exit codes: 0 all converged and written, 1 runtime failure, 2 bad config/input
constexpr int exit_runtime = 1;
constexpr int exit_config = 2;

void print_error(const std::string& what) {
    std::string line = what;
    for (auto& c : line)
        if (c == '\n') c = ' ';
    std::cerr << "error: " << line << "\n";
}

[[noreturn]] void config_error(const std::string& msg) {
    throw std::runtime_error(msg);
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    return p.is_absolute() ? p : base / p;
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.variant) cfg.model.variant = *o.variant;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) config_error("cannot write " + path.string());
    return out;
}

void write_json_file(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) config_error("cannot write " + path.string());
}

void note_written(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

json model_echo(const PolaritonModel& m) {
    json j{{"f_p_GHz", m.f_p / 1e9},
           {"gamma_GHz_per_T", m.magnon.gamma_over_2pi / 1e9},
           {"mu0_Meff_mT", m.magnon.mu0_Meff * 1e3},
           {"G_eff_MHz", m.coupling.effective() / 1e6},
           {"n", m.coupling.n},
           {"variant", to_string(m.variant)}};
    switch (m.dia.mode) {
        case DiamagneticSpec::Mode::none: break;
        case DiamagneticSpec::Mode::beta: j["beta_rad2_per_s2"] = m.dia.beta; break;
        case DiamagneticSpec::Mode::suppression: j["suppression_B"] = m.dia.B; break;
    }
    return j;
}

// branch frequencies at the fitted parameters, for residual files; empty when
// the point is infeasible there
std::optional<BranchPair> fitted_branches(ModelVariant variant, double gamma, double f_p,
                                          double mu0_Meff, double G_eff, double beta,
                                          double mu0_H) {
    try {
        PolaritonModel m;
        m.f_p = f_p;
        m.magnon.gamma_over_2pi = gamma;
        m.magnon.mu0_Meff = mu0_Meff;
        m.coupling = CouplingParams::from_G_eff(G_eff);
        m.dia = variant == ModelVariant::hopfield ? DiamagneticSpec::from_beta(beta)
                                                  : DiamagneticSpec::off();
        m.variant = variant;
        return polariton_frequencies_eig(m, mu0_H);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<ObservedPoint> to_observed(const std::vector<PointRow>& rows) {
    std::vector<ObservedPoint> points;
    points.reserve(rows.size());
    for (const auto& r : rows) {
        ObservedPoint p;
        p.mu0_H = r.mu0_H;
        p.f = r.f;
        if (r.branch == "lower") p.branch = Branch::lower;
        else if (r.branch == "upper") p.branch = Branch::upper;
        p.hwhm = r.hwhm;
        points.push_back(p);
    }
    return points;
}

double parse_cell(const std::string& cell, const fs::path& path, std::size_t line) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::runtime_error(path.string() + ":" + std::to_string(line) +
                                 ": not a number: \"" + cell + "\"");
    return v;
}

// "f_GHz,re,im" rows for the resonator fit
ComplexTrace read_trace_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw std::runtime_error(path.string() + ":1: empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "f_GHz,re,im")
        throw std::runtime_error(path.string() + ":1: expected header \"f_GHz,re,im\"");

    ComplexTrace trace;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(parse_cell(cell, path, lineno));
        if (vals.size() != 3)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected 3 columns, got " + std::to_string(vals.size()));
        trace.freq.push_back(vals[0] * 1e9);
        trace.s21.emplace_back(vals[1], vals[2]);
    }
    if (trace.freq.empty())
        throw std::runtime_error(path.string() + ": no data rows");
    return trace;
}

void require_block(bool present, const char* what) {
    if (!present) config_error(std::string("config: this command needs a ") + what + " block");
}

} // namespace

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const Overrides& overrides) {
    try {
        RunConfig cfg = load_config(config_path);
        apply_overrides(cfg, overrides);
        require_block(cfg.has_model, "\"model\"");
        require_block(cfg.field_grid.has_value(), "\"field_grid\"");
        require_block(cfg.freq_grid.has_value(), "\"freq_grid\"");
        require_block(cfg.resonator.has_value(), "\"resonator\"");
        require_block(cfg.damping.has_value(), "\"damping\"");
        cfg.model.validate();

        const auto fields = cfg.field_grid->values();
        const auto freqs = cfg.freq_grid->values();

        SpectrumGrid grid = synthesize_grid(*cfg.resonator, cfg.model, *cfg.damping, fields, freqs);
        if (cfg.snr_db) grid = add_noise(grid, *cfg.snr_db, cfg.seed);
        const double ref = cfg.reference_field.value_or(fields.front());
        const SpectrumGrid norm = normalize_grid(grid, ref);

        const fs::path out(out_dir);
        fs::create_directories(out);

        json meta{{"command", "simulate"},
                  {"seed", cfg.seed},
                  {"model", model_echo(cfg.model)},
                  {"snr_dB", cfg.snr_db ? json(*cfg.snr_db) : json()}};
        const auto files = write_grid(out / "s21_grid", norm, meta);
        for (const auto& f : files.csv) note_written(f);
        note_written(files.sidecar);

        const auto curve = dispersion(cfg.model, fields);

        const fs::path disp_path = out / "dispersion.csv";
        {
            auto csv = open_out(disp_path);
            csv << "mu0_H_mT,f_lower_GHz,f_upper_GHz,photon_frac_lower,photon_frac_upper\n";
            for (const auto& pt : curve) {
                csv << format_value(pt.mu0_H * 1e3) << ',' << format_value(pt.branches.f_lower / 1e9)
                    << ',' << format_value(pt.branches.f_upper / 1e9) << ','
                    << format_value(pt.branches.photon_fraction_lower) << ','
                    << format_value(pt.branches.photon_fraction_upper) << '\n';
            }
            if (!csv) config_error("cannot write " + disp_path.string());
        }
        note_written(disp_path);

        std::vector<PointRow> rows;
        for (const auto& pt : curve) {
            rows.push_back({pt.mu0_H, pt.branches.f_lower, "lower", std::nullopt});
            rows.push_back({pt.mu0_H, pt.branches.f_upper, "upper", std::nullopt});
        }
        const fs::path points_path = out / "points.csv";
        write_points_csv(points_path, rows);
        note_written(points_path);

        json metadata = meta;
        metadata["reference_field_mT"] = norm.reference_field ? json(*norm.reference_field * 1e3)
                                                              : json();
        json file_list = json::array();
        for (const auto& f : files.csv) file_list.push_back(f.filename().string());
        file_list.push_back(files.sidecar.filename().string());
        file_list.push_back(disp_path.filename().string());
        file_list.push_back(points_path.filename().string());
        metadata["files"] = file_list;
        const fs::path meta_path = out / "metadata.json";
        write_json_file(meta_path, metadata);
        note_written(meta_path);

        if (overrides.emit_plots) {
            std::vector<double> h_mt, f_lo, f_up;
            for (const auto& pt : curve) {
                h_mt.push_back(pt.mu0_H * 1e3);
                f_lo.push_back(pt.branches.f_lower / 1e9);
                f_up.push_back(pt.branches.f_upper / 1e9);
            }
            write_line_svg(out / "dispersion.svg",
                           {{"lower", "#1f77b4", h_mt, f_lo}, {"upper", "#d62728", h_mt, f_up}},
                           "mu0_H (mT)", "f (GHz)", "polariton dispersion");
            note_written(out / "dispersion.svg");
            write_heatmap_svg(out / "s21_grid.svg", norm, "normalized |S21| ratio");
            note_written(out / "s21_grid.svg");
        }
        return 0;
    } catch (const SupercriticalError& e) {
        print_error(e.what());
        return exit_runtime;
    } catch (const std::exception& e) {
        print_error(e.what());
        return exit_config;
    }
}

// ---------------------------------------------------------------------------
// fit

namespace {

int fit_dispersion_cmd(const RunConfig& cfg, const fs::path& out, const Overrides& overrides) {
    const auto& spec = *cfg.fit;
    const fs::path data = resolve(cfg.base_dir, spec.points_csv);
    const auto rows = read_points_csv(data);
    if (rows.empty()) config_error(data.string() + ": no data rows");
    const auto points = to_observed(rows);

    DispersionFitConfig fc;
    fc.variant = cfg.model.variant;
    fc.gamma_over_2pi = cfg.model.magnon.gamma_over_2pi;
    fc.fit_beta = spec.fit_beta;
    fc.f_p_init = spec.f_p_init;
    fc.mu0_Meff_init = spec.mu0_Meff_init;
    fc.G_eff_init = spec.G_eff_init;
    fc.beta_init = spec.beta_init;

    const FitResult result = fit_dispersion(points, fc);

    json out_json = fit_result_json(result);
    out_json["command"] = "fit";
    out_json["kind"] = "dispersion";
    out_json["variant"] = to_string(fc.variant);
    write_json_file(out / "fit_result.json", out_json);
    note_written(out / "fit_result.json");

    const double f_p = result.value("f_p");
    const double meff = result.value("mu0_Meff");
    const double g = result.value("G_eff");
    const double beta = result.has("beta_dia") ? result.value("beta_dia")
                                               : spec.beta_init.value_or(0.0);

    const fs::path res_path = out / "residuals.csv";
    {
        auto csv = open_out(res_path);
        csv << "mu0_H_mT,f_obs_GHz,branch,f_model_GHz,residual_MHz\n";
        std::vector<double> plot_h, plot_r;
        for (const auto& p : points) {
            const auto pair =
                fitted_branches(fc.variant, fc.gamma_over_2pi, f_p, meff, g, beta, p.mu0_H);
            std::string branch = "lower";
            std::string model_f, resid;
            if (pair) {
                Branch b;
                if (p.branch) b = *p.branch;
                else
                    b = std::abs(p.f - pair->f_lower) <= std::abs(p.f - pair->f_upper)
                            ? Branch::lower
                            : Branch::upper;
                branch = b == Branch::upper ? "upper" : "lower";
                const double fm = b == Branch::upper ? pair->f_upper : pair->f_lower;
                model_f = format_value(fm / 1e9);
                resid = format_value((fm - p.f) / 1e6);
                plot_h.push_back(p.mu0_H * 1e3);
                plot_r.push_back((fm - p.f) / 1e6);
            }
            csv << format_value(p.mu0_H * 1e3) << ',' << format_value(p.f / 1e9) << ',' << branch
                << ',' << model_f << ',' << resid << '\n';
        }
        if (!csv) config_error("cannot write " + res_path.string());
        if (overrides.emit_plots) {
            write_line_svg(out / "residuals.svg", {{"residual", "#1f77b4", plot_h, plot_r}},
                           "mu0_H (mT)", "residual (MHz)", "dispersion fit residuals");
            note_written(out / "residuals.svg");
        }
    }
    note_written(res_path);

    if (!result.converged) {
        print_error("fit did not converge: " + std::string(to_string(result.status)));
        return exit_runtime;
    }
    return 0;
}

int fit_resonator_cmd(const RunConfig& cfg, const fs::path& out, const Overrides& overrides) {
    const fs::path data = resolve(cfg.base_dir, cfg.fit->trace_csv);
    const ComplexTrace trace = read_trace_csv(data);
    const FitResult result = fit_bare_resonator(trace);

    json out_json = fit_result_json(result);
    out_json["command"] = "fit";
    out_json["kind"] = "resonator";
    write_json_file(out / "fit_result.json", out_json);
    note_written(out / "fit_result.json");

    const ResonatorLineShape shape = line_shape_from_fit(result);
    const fs::path res_path = out / "residuals.csv";
    {
        auto csv = open_out(res_path);
        csv << "f_GHz,re_obs,im_obs,re_model,im_model\n";
        std::vector<double> fr, mag_obs, mag_model;
        for (std::size_t i = 0; i < trace.freq.size(); ++i) {
            const auto model = bare_s21(trace.freq[i], shape);
            csv << format_value(trace.freq[i] / 1e9) << ',' << format_value(trace.s21[i].real())
                << ',' << format_value(trace.s21[i].imag()) << ',' << format_value(model.real())
                << ',' << format_value(model.imag()) << '\n';
            fr.push_back(trace.freq[i] / 1e9);
            mag_obs.push_back(std::abs(trace.s21[i]));
            mag_model.push_back(std::abs(model));
        }
        if (!csv) config_error("cannot write " + res_path.string());
        if (overrides.emit_plots) {
            write_line_svg(out / "residuals.svg",
                           {{"data", "#1f77b4", fr, mag_obs}, {"fit", "#d62728", fr, mag_model}},
                           "f (GHz)", "|S21|", "resonator fit");
            note_written(out / "residuals.svg");
        }
    }
    note_written(res_path);

    if (!result.converged) {
        print_error("fit did not converge: " + std::string(to_string(result.status)));
        return exit_runtime;
    }
    return 0;
}

int fit_linewidths_cmd(const RunConfig& cfg, const fs::path& out, const Overrides& overrides) {
    if (!cfg.has_model || !(cfg.model.f_p > 0.0) || !(cfg.model.magnon.mu0_Meff > 0.0))
        config_error("config: linewidth fit needs model.f_p_GHz and model.mu0_Meff_mT");
    const fs::path data = resolve(cfg.base_dir, cfg.fit->points_csv);
    const auto rows = read_points_csv(data);
    if (rows.empty()) config_error(data.string() + ": no data rows");
    const auto points = to_observed(rows);

    LinewidthFitConfig lc;
    lc.f_p = cfg.model.f_p;
    lc.mu0_Meff = cfg.model.magnon.mu0_Meff;
    lc.gamma_over_2pi = cfg.model.magnon.gamma_over_2pi;
    lc.G_eff_init = cfg.fit->G_eff_init;
    lc.kappa_p_init = cfg.fit->kappa_p_init;
    lc.kappa_m_init = cfg.fit->kappa_m_init;

    const LinewidthFit lw = fit_linewidths(points, lc);

    DampingParams fitted{lw.fit.value("kappa_p"), lw.fit.value("kappa_m")};
    json out_json = fit_result_json(lw.fit);
    out_json["command"] = "fit";
    out_json["kind"] = "linewidths";
    out_json["regime"] = regime_report_json(lw.regime, lw.fit.value("G_eff"), fitted);
    write_json_file(out / "fit_result.json", out_json);
    note_written(out / "fit_result.json");

    MagnonParams mp;
    mp.gamma_over_2pi = lc.gamma_over_2pi;
    mp.mu0_Meff = lc.mu0_Meff;
    const double g_fit = lw.fit.value("G_eff");

    const fs::path res_path = out / "residuals.csv";
    {
        auto csv = open_out(res_path);
        csv << "mu0_H_mT,f_obs_GHz,branch,f_model_GHz,hwhm_obs_MHz,hwhm_model_MHz\n";
        std::vector<double> plot_h, plot_r;
        for (const auto& p : points) {
            const double fm = kittel_frequency(p.mu0_H, mp);
            const auto freqs = rwa_frequencies(lc.f_p, fm, g_fit);
            const auto widths = rwa_linewidths(lc.f_p, fm, fitted, g_fit);
            Branch b;
            if (p.branch) b = *p.branch;
            else
                b = std::abs(p.f - freqs.f_lower) <= std::abs(p.f - freqs.f_upper) ? Branch::lower
                                                                                   : Branch::upper;
            const bool upper = b == Branch::upper;
            const double f_model = upper ? freqs.f_upper : freqs.f_lower;
            const double k_model = upper ? widths.kappa_plus : widths.kappa_minus;
            csv << format_value(p.mu0_H * 1e3) << ',' << format_value(p.f / 1e9) << ','
                << (upper ? "upper" : "lower") << ',' << format_value(f_model / 1e9) << ','
                << format_value(*p.hwhm / 1e6) << ',' << format_value(k_model / 1e6) << '\n';
            plot_h.push_back(p.mu0_H * 1e3);
            plot_r.push_back((k_model - *p.hwhm) / 1e6);
        }
        if (!csv) config_error("cannot write " + res_path.string());
        if (overrides.emit_plots) {
            write_line_svg(out / "residuals.svg", {{"width residual", "#1f77b4", plot_h, plot_r}},
                           "mu0_H (mT)", "residual (MHz)", "linewidth fit residuals");
            note_written(out / "residuals.svg");
        }
    }
    note_written(res_path);

    if (!lw.fit.converged) {
        print_error("fit did not converge: " + std::string(to_string(lw.fit.status)));
        return exit_runtime;
    }
    return 0;
}

} // namespace

int cmd_fit(const std::string& config_path, const std::string& out_dir,
            const Overrides& overrides) {
    try {
        RunConfig cfg = load_config(config_path);
        apply_overrides(cfg, overrides);
        require_block(cfg.fit.has_value(), "\"fit\"");
        const fs::path out(out_dir);
        fs::create_directories(out);
        switch (cfg.fit->kind) {
            case FitSpec::Kind::dispersion: return fit_dispersion_cmd(cfg, out, overrides);
            case FitSpec::Kind::resonator: return fit_resonator_cmd(cfg, out, overrides);
            case FitSpec::Kind::linewidths: return fit_linewidths_cmd(cfg, out, overrides);
        }
        config_error("unreachable fit kind");
    } catch (const std::exception& e) {
        print_error(e.what());
        return exit_config;
    }
}

// ---------------------------------------------------------------------------
// bloch-siegert

int cmd_bloch_siegert(const std::string& config_path, const std::string& out_dir,
                      const Overrides& overrides) {
    try {
        RunConfig cfg = load_config(config_path);
        apply_overrides(cfg, overrides);
        require_block(cfg.has_model, "\"model\"");
        require_block(cfg.field_grid.has_value(), "\"field_grid\"");
        cfg.model.validate();
        if (cfg.model.variant == ModelVariant::rwa)
            config_error("config: the co-rotating variant has no counter-rotating shift");

        const auto fields = cfg.field_grid->values();
        const fs::path out(out_dir);
        fs::create_directories(out);

        bool any_failed = false;
        struct Row {
            double h;
            bool ok;
            double f_lo, f_up, d_lo, d_up;
        };
        std::vector<Row> table;
        for (const double h : fields) {
            Row row{h, false, 0, 0, 0, 0};
            try {
                const auto pair = polariton_frequencies_eig(cfg.model, h);
                row.f_lo = pair.f_lower;
                row.f_up = pair.f_upper;
                row.d_lo = bloch_siegert_shift(cfg.model, h, Branch::lower);
                row.d_up = bloch_siegert_shift(cfg.model, h, Branch::upper);
                row.ok = true;
            } catch (const SupercriticalError&) {
                any_failed = true;
            }
            table.push_back(row);
        }

        const fs::path csv_path = out / "bloch_siegert.csv";
        {
            auto csv = open_out(csv_path);
            csv << "mu0_H_mT,f_lower_GHz,f_upper_GHz,delta_f_bs_lower_MHz,delta_f_bs_upper_MHz,"
                   "status\n";
            for (const auto& r : table) {
                csv << format_value(r.h * 1e3) << ',';
                if (r.ok)
                    csv << format_value(r.f_lo / 1e9) << ',' << format_value(r.f_up / 1e9) << ','
                        << format_value(r.d_lo / 1e6) << ',' << format_value(r.d_up / 1e6)
                        << ",ok\n";
                else
                    csv << ",,,,supercritical\n";
            }
            if (!csv) config_error("cannot write " + csv_path.string());
        }
        note_written(csv_path);

        if (overrides.emit_plots) {
            std::vector<double> h_mt, d_lo, d_up;
            for (const auto& r : table) {
                h_mt.push_back(r.h * 1e3);
                d_lo.push_back(r.ok ? r.d_lo / 1e6 : std::numeric_limits<double>::quiet_NaN());
                d_up.push_back(r.ok ? r.d_up / 1e6 : std::numeric_limits<double>::quiet_NaN());
            }
            write_line_svg(out / "bloch_siegert.svg",
                           {{"lower", "#1f77b4", h_mt, d_lo}, {"upper", "#d62728", h_mt, d_up}},
                           "mu0_H (mT)", "shift (MHz)", "counter-rotating branch shift");
            note_written(out / "bloch_siegert.svg");
        }

        if (cfg.bloch_siegert && !cfg.bloch_siegert->couplings.empty()) {
            const auto& bs = *cfg.bloch_siegert;
            std::vector<double> at_fields =
                bs.scaling_fields.empty() ? std::vector<double>{fields.back()} : bs.scaling_fields;

            json fits = json::array();
            for (const double h : at_fields) {
                json samples = json::array();
                std::vector<BsSample> valid;
                for (const auto& c : bs.couplings) {
                    PolaritonModel m = cfg.model;
                    m.coupling = CouplingParams::from_G_eff(
                        c.G_eff.value(), std::max(1, static_cast<int>(std::lround(c.n))));
                    const double eps_sq = c.G_eff.value() * c.G_eff.value() / m.f_p;
                    json sample{{"n", c.n},
                                {"G_eff_MHz", c.G_eff.value() / 1e6},
                                {"epsilon_sq_Hz", eps_sq}};
                    try {
                        const double shift = bloch_siegert_shift(m, h, bs.scaling_branch);
                        sample["delta_f_bs_MHz"] = shift / 1e6;
                        sample["status"] = "ok";
                        valid.push_back({eps_sq, shift});
                    } catch (const SupercriticalError&) {
                        sample["status"] = "supercritical";
                        any_failed = true;
                    }
                    samples.push_back(sample);
                }
                json entry{{"mu0_H_mT", h * 1e3},
                           {"branch", bs.scaling_branch == Branch::upper ? "upper" : "lower"},
                           {"samples", samples}};
                if (valid.size() >= 2) {
                    const LineFit line = fit_bs_scaling(valid);
                    entry["slope"] = line.slope;
                    entry["intercept_Hz"] = line.intercept;
                    entry["r_squared"] = line.r_squared;
                    entry["residual_rms_Hz"] = line.residual_rms;
                    entry["identifiable"] = line.identifiable;
                } else {
                    entry["identifiable"] = false;
                }
                fits.push_back(entry);
            }
            const fs::path scaling_path = out / "bs_scaling.json";
            write_json_file(scaling_path, json{{"command", "bloch-siegert"}, {"fits", fits}});
            note_written(scaling_path);
        }

        if (any_failed) {
            print_error("supercritical rows encountered; see status column");
            return exit_runtime;
        }
        return 0;
    } catch (const std::exception& e) {
        print_error(e.what());
        return exit_config;
    }
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& config_path, const std::string& out_dir,
               const Overrides& overrides) {
    try {
        RunConfig cfg = load_config(config_path);
        apply_overrides(cfg, overrides);
        require_block(cfg.has_model, "\"model\"");
        require_block(cfg.report.has_value(), "\"report\"");
        cfg.model.validate();

        const double f_m = cfg.report->f_m ? *cfg.report->f_m
                                           : cfg.model.magnon_frequency(*cfg.report->mu0_H);
        const double f_p = cfg.model.f_p;
        const double g_eff = cfg.model.coupling.effective();

        const double g_prime = rescaled_coupling(g_eff, f_m, f_p);
        const double d = diamagnetic_D(cfg.model.dia, f_m, g_prime);
        const TrkReport trk = trk_analysis(g_eff, f_m, d);
        const CouplingRatio ratio = coupling_ratio(g_eff, f_p);

        json report{{"f_p_GHz", f_p / 1e9},
                    {"f_m_GHz", f_m / 1e9},
                    {"G_eff_MHz", g_eff / 1e6},
                    {"g_prime_MHz", g_prime / 1e6},
                    {"eta", ratio.eta},
                    {"ultrastrong", ratio.ultrastrong},
                    {"D_MHz", d / 1e6},
                    {"D_trk_MHz", trk.D_trk / 1e6},
                    {"B", trk.B}};

        int code = 0;
        try {
            const double g_c = critical_coupling(trk.B, f_p, f_m);
            report["G_c_GHz"] = g_c / 1e9;
            if (g_eff > 0.0) report["G_c_over_G_eff"] = g_c / g_eff;
        } catch (const NoGoLimitError& e) {
            report["no_go"] = e.what();
            print_error(e.what());
            code = exit_runtime;
        }

        if (cfg.damping) {
            const RegimeReport regime = classify_regime(g_eff, *cfg.damping);
            report["regime"] = to_string(regime.regime);
            report["cooperativity"] = regime.cooperativity;
            report["kappa_p_MHz"] = cfg.damping->kappa_p / 1e6;
            report["kappa_m_MHz"] = cfg.damping->kappa_m / 1e6;
        }

        const fs::path out(out_dir);
        fs::create_directories(out);
        write_json_file(out / "report.json", report);
        note_written(out / "report.json");
        return code;
    } catch (const std::exception& e) {
        print_error(e.what());
        return exit_config;
    }
}

// ---------------------------------------------------------------------------
// scaling

int cmd_scaling(const std::string& config_path, const std::string& out_dir,
                const Overrides& overrides) {
    try {
        RunConfig cfg = load_config(config_path);
        apply_overrides(cfg, overrides);
        require_block(!cfg.scaling_samples.empty(), "\"scaling\"");

        const bool needs_f_p = std::any_of(cfg.scaling_samples.begin(), cfg.scaling_samples.end(),
                                           [](const CouplingSample& s) { return s.G_eff.has_value(); });
        if (needs_f_p && !(cfg.has_model && cfg.model.f_p > 0.0))
            config_error("config: scaling samples given as G_eff_MHz need model.f_p_GHz");

        std::vector<ScalingSample> samples;
        for (const auto& s : cfg.scaling_samples) {
            ScalingSample out_s;
            out_s.n = s.n;
            out_s.epsilon = s.epsilon ? *s.epsilon : normalized_coupling(*s.G_eff, cfg.model.f_p);
            samples.push_back(out_s);
        }

        const SqrtScalingFit fit = fit_sqrt_n_scaling(samples);

        json out_json{{"command", "scaling"},
                      {"alpha_sqrt_Hz", fit.alpha},
                      {"residual_rms_sqrt_Hz", fit.residual_rms},
                      {"identifiable", fit.identifiable},
                      {"sample_count", samples.size()}};

        double big_n = cfg.model.coupling.N;
        if (!(big_n > 0.0)) big_n = spin_count(cfg.model.magnon);
        if (big_n > 0.0 && cfg.has_model && cfg.model.f_p > 0.0) {
            out_json["N"] = big_n;
            out_json["g_s_Hz"] = infer_gs(fit.alpha, cfg.model.f_p, big_n);
        }

        const fs::path out(out_dir);
        fs::create_directories(out);
        write_json_file(out / "scaling.json", out_json);
        note_written(out / "scaling.json");

        if (overrides.emit_plots) {
            std::vector<std::size_t> order(samples.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return samples[a].n < samples[b].n;
            });
            std::vector<double> sq, eps, fit_eps;
            for (const auto i : order) {
                sq.push_back(std::sqrt(samples[i].n));
                eps.push_back(samples[i].epsilon);
                fit_eps.push_back(fit.alpha * std::sqrt(samples[i].n));
            }
            write_line_svg(out / "scaling.svg",
                           {{"data", "#1f77b4", sq, eps}, {"fit", "#d62728", sq, fit_eps}},
                           "sqrt(n)", "epsilon (sqrt Hz)", "coupling scaling");
            note_written(out / "scaling.svg");
        }

        if (!fit.identifiable) {
            print_error("scaling fit unidentifiable: every sample shares one n");
            return exit_runtime;
        }
        return 0;
    } catch (const std::exception& e) {
        print_error(e.what());
        return exit_config;
    }
}

} // namespace magpol::cli
