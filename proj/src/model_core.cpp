#include "magpol/model_core.hpp"

#include <cmath>
#include <stdexcept>

#include "magpol/constants.hpp"

namespace magpol {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

void MagnonParams::validate() const {
    require(gamma_over_2pi > 0.0, "MagnonParams: gamma_over_2pi must be > 0");
    require(mu0_Meff >= 0.0, "MagnonParams: mu0_Meff must be >= 0");
    require(mu0_Ms >= 0.0, "MagnonParams: mu0_Ms must be >= 0");
    require(stripe_width >= 0.0 && stripe_length >= 0.0 && film_thickness >= 0.0,
            "MagnonParams: geometry must be >= 0");
}

CouplingParams CouplingParams::from_g_s(double g_s, double N, int n) {
    require(g_s >= 0.0, "CouplingParams: g_s must be >= 0");
    require(N >= 0.0, "CouplingParams: N must be >= 0");
    require(n >= 0, "CouplingParams: n must be >= 0");
    CouplingParams p;
    p.g_s = g_s;
    p.N = N;
    p.n = n;
    p.G_eff_over_2pi = bright_mode_coupling(collective_coupling(g_s, N), n);
    return p;
}

CouplingParams CouplingParams::from_G_eff(double G_eff, int n) {
    require(G_eff >= 0.0, "CouplingParams: G_eff must be >= 0");
    require(n >= 0, "CouplingParams: n must be >= 0");
    require(n > 0 || G_eff == 0.0, "CouplingParams: n = 0 forces G_eff = 0");
    CouplingParams p;
    p.n = n;
    p.G_eff_over_2pi = G_eff;
    return p;
}

void CouplingParams::validate() const {
    require(g_s >= 0.0 && N >= 0.0 && G_eff_over_2pi >= 0.0,
            "CouplingParams: negative value");
    require(n >= 0, "CouplingParams: n must be >= 0");
    require(n > 0 || G_eff_over_2pi == 0.0, "CouplingParams: n = 0 forces G_eff = 0");
}

DiamagneticSpec DiamagneticSpec::from_beta(double beta) {
    require(beta >= 0.0, "DiamagneticSpec: beta must be >= 0");
    DiamagneticSpec d;
    d.mode = Mode::beta;
    d.beta = beta;
    return d;
}

DiamagneticSpec DiamagneticSpec::from_suppression(double B) {
    require(B >= 0.0 && B < 1.0, "DiamagneticSpec: B must lie in [0, 1)");
    DiamagneticSpec d;
    d.mode = Mode::suppression;
    d.B = B;
    return d;
}

void DiamagneticSpec::validate() const {
    switch (mode) {
        case Mode::none: break;
        case Mode::beta: require(beta >= 0.0, "DiamagneticSpec: beta must be >= 0"); break;
        case Mode::suppression:
            require(B >= 0.0 && B < 1.0, "DiamagneticSpec: B must lie in [0, 1)");
            break;
    }
}

const char* to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::hopfield: return "hopfield";
        case ModelVariant::dicke: return "dicke";
        case ModelVariant::rwa: return "rwa";
    }
    return "?";
}

ModelVariant variant_from_string(const std::string& s) {
    if (s == "hopfield") return ModelVariant::hopfield;
    if (s == "dicke") return ModelVariant::dicke;
    if (s == "rwa") return ModelVariant::rwa;
    throw std::invalid_argument("unknown model variant '" + s +
                                "' (expected hopfield|dicke|rwa)");
}

double kittel_frequency(double mu0_H, const MagnonParams& params) {
    params.validate();
    const double h = std::abs(mu0_H); // spectra depend on field magnitude
    return params.gamma_over_2pi * std::sqrt(h * (h + params.mu0_Meff));
}

double kittel_field(double f_m, const MagnonParams& params) {
    params.validate();
    require(f_m >= 0.0, "kittel_field: f_m must be >= 0");
    // positive root of H^2 + Meff*H - (f/gamma)^2 = 0
    const double c = f_m / params.gamma_over_2pi;
    const double m = params.mu0_Meff;
    return 0.5 * (std::sqrt(m * m + 4.0 * c * c) - m);
}

double collective_coupling(double g_s, double N) {
    require(g_s >= 0.0, "collective_coupling: g_s must be >= 0");
    require(N >= 0.0, "collective_coupling: N must be >= 0");
    return g_s * std::sqrt(N);
}

double bright_mode_coupling(double g_0, int n) {
    require(g_0 >= 0.0, "bright_mode_coupling: g_0 must be >= 0");
    require(n >= 0, "bright_mode_coupling: n must be >= 0");
    return g_0 * std::sqrt(static_cast<double>(n));
}

double normalized_coupling(double G_eff, double f_p) {
    require(G_eff >= 0.0, "normalized_coupling: G_eff must be >= 0");
    require(f_p > 0.0, "normalized_coupling: f_p must be > 0");
    return G_eff / std::sqrt(f_p);
}

CouplingRatio coupling_ratio(double G_eff, double f_p) {
    require(G_eff >= 0.0, "coupling_ratio: G_eff must be >= 0");
    require(f_p > 0.0, "coupling_ratio: f_p must be > 0");
    CouplingRatio r;
    r.eta = G_eff / f_p;
    r.ultrastrong = r.eta > ultrastrong_threshold;
    return r;
}

double rescaled_coupling(double G_eff, double f_m, double f_p) {
    require(G_eff >= 0.0, "rescaled_coupling: G_eff must be >= 0");
    require(f_m >= 0.0, "rescaled_coupling: f_m must be >= 0");
    require(f_p > 0.0, "rescaled_coupling: f_p must be > 0");
    return G_eff * std::sqrt(f_m / f_p);
}

double diamagnetic_D(const DiamagneticSpec& spec, double f_m, double g_prime) {
    spec.validate();
    if (spec.mode == DiamagneticSpec::Mode::none) return 0.0;
    if (f_m <= 0.0)
        throw std::domain_error("diamagnetic_D: f_m = 0 is singular for this mode");
    switch (spec.mode) {
        case DiamagneticSpec::Mode::beta:
            return spec.beta / (constants::two_pi * constants::two_pi * f_m);
        case DiamagneticSpec::Mode::suppression:
            require(g_prime >= 0.0, "diamagnetic_D: g_prime must be >= 0");
            return spec.B * g_prime * g_prime / f_m;
        case DiamagneticSpec::Mode::none: break;
    }
    return 0.0;
}

double spin_count(const MagnonParams& params) {
    params.validate();
    const double volume = params.stripe_width * params.stripe_length * params.film_thickness;
    const double Ms = params.mu0_Ms / constants::mu0; // [A/m]
    return Ms * volume / constants::bohr_magneton;
}

} // namespace magpol
