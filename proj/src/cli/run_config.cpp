#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace magpol::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("config: " + msg);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) fail("unknown key \"" + item.key() + "\" in " + where);
    }
}

double get_number(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where + " is missing \"" + key + "\"");
    const auto& v = j.at(key);
    if (!v.is_number()) fail("\"" + std::string(key) + "\" in " + where + " must be a number");
    return v.get<double>();
}

std::optional<double> opt_number(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return get_number(j, where, key);
}

int get_int(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where + " is missing \"" + key + "\"");
    const auto& v = j.at(key);
    if (!v.is_number_integer()) fail("\"" + std::string(key) + "\" in " + where + " must be an integer");
    return v.get<int>();
}

std::optional<std::string> opt_string(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (!v.is_string()) fail("\"" + std::string(key) + "\" in " + where + " must be a string");
    return v.get<std::string>();
}

void parse_model(const json& j, RunConfig& cfg) {
    check_keys(j, "model",
               {"f_p_GHz", "gamma_GHz_per_T", "mu0_Meff_mT", "mu0_Ms_mT", "stripe_width_um",
                "stripe_length_um", "film_thickness_nm", "G_eff_MHz", "g_s_Hz", "N", "n",
                "variant", "beta_rad2_per_s2", "suppression_B"});
    auto& m = cfg.model;
    try {
        if (auto v = opt_number(j, "model", "f_p_GHz")) m.f_p = *v * 1e9;
        if (auto v = opt_number(j, "model", "gamma_GHz_per_T"))
            m.magnon.gamma_over_2pi = *v * 1e9;
        if (auto v = opt_number(j, "model", "mu0_Meff_mT")) m.magnon.mu0_Meff = *v * 1e-3;
        if (auto v = opt_number(j, "model", "mu0_Ms_mT")) m.magnon.mu0_Ms = *v * 1e-3;
        if (auto v = opt_number(j, "model", "stripe_width_um")) m.magnon.stripe_width = *v * 1e-6;
        if (auto v = opt_number(j, "model", "stripe_length_um"))
            m.magnon.stripe_length = *v * 1e-6;
        if (auto v = opt_number(j, "model", "film_thickness_nm"))
            m.magnon.film_thickness = *v * 1e-9;

        const auto g_eff = opt_number(j, "model", "G_eff_MHz");
        const auto g_s = opt_number(j, "model", "g_s_Hz");
        const auto big_n = opt_number(j, "model", "N");
        const int n = j.contains("n") ? get_int(j, "model", "n") : 1;
        if (g_eff && g_s) fail("model: give either \"G_eff_MHz\" or \"g_s_Hz\" + \"N\", not both");
        if (g_s.has_value() != big_n.has_value())
            fail("model: \"g_s_Hz\" and \"N\" must be given together");
        if (g_s) m.coupling = CouplingParams::from_g_s(*g_s, *big_n, n);
        else m.coupling = CouplingParams::from_G_eff(g_eff.value_or(0.0) * 1e6, n);
        if (big_n) m.coupling.N = *big_n;

        const auto beta = opt_number(j, "model", "beta_rad2_per_s2");
        const auto supp = opt_number(j, "model", "suppression_B");
        if (beta && supp)
            fail("model: give either \"beta_rad2_per_s2\" or \"suppression_B\", not both");
        if (beta) m.dia = DiamagneticSpec::from_beta(*beta);
        else if (supp) m.dia = DiamagneticSpec::from_suppression(*supp);

        if (auto v = opt_string(j, "model", "variant")) m.variant = variant_from_string(*v);
    } catch (const std::invalid_argument& e) {
        fail(std::string("model: ") + e.what());
    }
    cfg.has_model = true;
}

GridSpec parse_grid(const json& j, const std::string& where, const char* start_key,
                    const char* stop_key, double scale) {
    check_keys(j, where, {start_key, stop_key, "count"});
    GridSpec g;
    g.start = get_number(j, where, start_key) * scale;
    g.stop = get_number(j, where, stop_key) * scale;
    g.count = get_int(j, where, "count");
    if (g.count < 1) fail(where + ": count must be >= 1");
    if (g.stop < g.start) fail(where + ": stop must not precede start");
    if (g.count > 1 && g.stop == g.start) fail(where + ": stop must exceed start");
    return g;
}

ResonatorLineShape parse_resonator(const json& j) {
    check_keys(j, "resonator",
               {"f_r_GHz", "Q_int", "Q_ext_mag", "phi_rad", "env_amp", "env_phase_rad", "tau_ns"});
    ResonatorLineShape s;
    s.f_r = get_number(j, "resonator", "f_r_GHz") * 1e9;
    s.Q_int = get_number(j, "resonator", "Q_int");
    s.Q_ext_mag = get_number(j, "resonator", "Q_ext_mag");
    s.phi = opt_number(j, "resonator", "phi_rad").value_or(0.0);
    s.env_amp = opt_number(j, "resonator", "env_amp").value_or(1.0);
    s.env_phase = opt_number(j, "resonator", "env_phase_rad").value_or(0.0);
    s.cable_delay = opt_number(j, "resonator", "tau_ns").value_or(0.0) * 1e-9;
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("resonator: ") + e.what());
    }
    return s;
}

DampingParams parse_damping(const json& j) {
    check_keys(j, "damping", {"kappa_p_MHz", "kappa_m_MHz"});
    DampingParams d;
    d.kappa_p = get_number(j, "damping", "kappa_p_MHz") * 1e6;
    d.kappa_m = get_number(j, "damping", "kappa_m_MHz") * 1e6;
    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("damping: ") + e.what());
    }
    return d;
}

FitSpec parse_fit(const json& j) {
    check_keys(j, "fit",
               {"kind", "points_csv", "trace_csv", "fit_beta", "f_p_init_GHz",
                "mu0_Meff_init_mT", "G_eff_init_MHz", "beta_init_rad2_per_s2",
                "kappa_p_init_MHz", "kappa_m_init_MHz"});
    FitSpec f;
    const auto kind = opt_string(j, "fit", "kind");
    if (!kind) fail("fit is missing \"kind\"");
    if (*kind == "dispersion") f.kind = FitSpec::Kind::dispersion;
    else if (*kind == "resonator") f.kind = FitSpec::Kind::resonator;
    else if (*kind == "linewidths") f.kind = FitSpec::Kind::linewidths;
    else fail("fit: unknown kind \"" + *kind + "\"");

    if (auto v = opt_string(j, "fit", "points_csv")) f.points_csv = *v;
    if (auto v = opt_string(j, "fit", "trace_csv")) f.trace_csv = *v;
    if (f.kind == FitSpec::Kind::resonator) {
        if (f.trace_csv.empty()) fail("fit: resonator kind needs \"trace_csv\"");
    } else if (f.points_csv.empty()) {
        fail("fit: \"" + *kind + "\" kind needs \"points_csv\"");
    }

    if (j.contains("fit_beta")) {
        if (!j.at("fit_beta").is_boolean()) fail("\"fit_beta\" in fit must be a boolean");
        f.fit_beta = j.at("fit_beta").get<bool>();
    }
    if (auto v = opt_number(j, "fit", "f_p_init_GHz")) f.f_p_init = *v * 1e9;
    if (auto v = opt_number(j, "fit", "mu0_Meff_init_mT")) f.mu0_Meff_init = *v * 1e-3;
    if (auto v = opt_number(j, "fit", "G_eff_init_MHz")) f.G_eff_init = *v * 1e6;
    if (auto v = opt_number(j, "fit", "beta_init_rad2_per_s2")) f.beta_init = *v;
    if (auto v = opt_number(j, "fit", "kappa_p_init_MHz")) f.kappa_p_init = *v * 1e6;
    if (auto v = opt_number(j, "fit", "kappa_m_init_MHz")) f.kappa_m_init = *v * 1e6;
    return f;
}

std::vector<CouplingSample> parse_samples(const json& arr, const std::string& where,
                                          bool allow_epsilon) {
    if (!arr.is_array() || arr.empty()) fail(where + " must be a non-empty array");
    std::vector<CouplingSample> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string item = where + "[" + std::to_string(i) + "]";
        if (allow_epsilon) check_keys(arr[i], item, {"n", "G_eff_MHz", "epsilon_sqrt_Hz"});
        else check_keys(arr[i], item, {"n", "G_eff_MHz"});
        CouplingSample s;
        s.n = get_number(arr[i], item, "n");
        if (!(s.n > 0.0)) fail(item + ": n must be > 0");
        if (auto v = opt_number(arr[i], item, "G_eff_MHz")) s.G_eff = *v * 1e6;
        if (allow_epsilon)
            if (auto v = opt_number(arr[i], item, "epsilon_sqrt_Hz")) s.epsilon = *v;
        if (s.G_eff.has_value() == s.epsilon.has_value())
            fail(item + ": give exactly one of \"G_eff_MHz\" or \"epsilon_sqrt_Hz\"");
        out.push_back(s);
    }
    return out;
}

BsSpec parse_bloch_siegert(const json& j) {
    check_keys(j, "bloch_siegert", {"scaling_branch", "couplings", "scaling_fields_mT"});
    BsSpec b;
    if (auto v = opt_string(j, "bloch_siegert", "scaling_branch")) {
        if (*v == "lower") b.scaling_branch = Branch::lower;
        else if (*v == "upper") b.scaling_branch = Branch::upper;
        else fail("bloch_siegert: scaling_branch must be \"lower\" or \"upper\"");
    }
    if (j.contains("couplings")) {
        b.couplings = parse_samples(j.at("couplings"), "bloch_siegert.couplings", false);
    }
    if (j.contains("scaling_fields_mT")) {
        const auto& arr = j.at("scaling_fields_mT");
        if (!arr.is_array() || arr.empty())
            fail("bloch_siegert: scaling_fields_mT must be a non-empty array");
        for (const auto& v : arr) {
            if (!v.is_number()) fail("bloch_siegert: scaling_fields_mT entries must be numbers");
            b.scaling_fields.push_back(v.get<double>() * 1e-3);
        }
    }
    return b;
}

ReportSpec parse_report(const json& j) {
    check_keys(j, "report", {"f_m_GHz", "mu0_H_mT"});
    ReportSpec r;
    if (auto v = opt_number(j, "report", "f_m_GHz")) r.f_m = *v * 1e9;
    if (auto v = opt_number(j, "report", "mu0_H_mT")) r.mu0_H = *v * 1e-3;
    if (r.f_m.has_value() == r.mu0_H.has_value())
        fail("report: give exactly one of \"f_m_GHz\" or \"mu0_H_mT\"");
    return r;
}

} // namespace

std::vector<double> GridSpec::values() const {
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = start;
        return v;
    }
    const double step = (stop - start) / (count - 1);
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = start + i * step;
    v.back() = stop; // land on the endpoint exactly
    return v;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        fail(path.string() + ": " + msg);
    }

    check_keys(j, "top level",
               {"model", "field_grid", "freq_grid", "resonator", "damping", "noise", "normalize",
                "seed", "fit", "scaling", "bloch_siegert", "report"});

    RunConfig cfg;
    cfg.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    if (j.contains("model")) parse_model(j.at("model"), cfg);
    if (j.contains("field_grid"))
        cfg.field_grid = parse_grid(j.at("field_grid"), "field_grid", "start_mT", "stop_mT", 1e-3);
    if (j.contains("freq_grid"))
        cfg.freq_grid = parse_grid(j.at("freq_grid"), "freq_grid", "start_GHz", "stop_GHz", 1e9);
    if (j.contains("resonator")) cfg.resonator = parse_resonator(j.at("resonator"));
    if (j.contains("damping")) cfg.damping = parse_damping(j.at("damping"));
    if (j.contains("noise")) {
        check_keys(j.at("noise"), "noise", {"snr_dB"});
        cfg.snr_db = get_number(j.at("noise"), "noise", "snr_dB");
    }
    if (j.contains("normalize")) {
        check_keys(j.at("normalize"), "normalize", {"reference_field_mT"});
        cfg.reference_field =
            get_number(j.at("normalize"), "normalize", "reference_field_mT") * 1e-3;
    }
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
            fail("\"seed\" must be a non-negative integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    if (j.contains("fit")) cfg.fit = parse_fit(j.at("fit"));
    if (j.contains("scaling")) {
        check_keys(j.at("scaling"), "scaling", {"samples"});
        if (!j.at("scaling").contains("samples")) fail("scaling is missing \"samples\"");
        cfg.scaling_samples = parse_samples(j.at("scaling").at("samples"), "scaling.samples", true);
    }
    if (j.contains("bloch_siegert")) cfg.bloch_siegert = parse_bloch_siegert(j.at("bloch_siegert"));
    if (j.contains("report")) cfg.report = parse_report(j.at("report"));
    return cfg;
}

} // namespace magpol::cli
