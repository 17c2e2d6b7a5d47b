#include "magpol/open_system.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace magpol {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// sqrt argument of the coupled-mode eigenfrequency formula
std::complex<double> mode_discriminant(double f_p, double f_m,
                                       const DampingParams& d, double G_eff) {
    const std::complex<double> z(f_p - f_m, -(d.kappa_m - d.kappa_p));
    std::complex<double> disc = z * z + 4.0 * G_eff * G_eff;
    // squaring a purely imaginary z leaves a -0.0 imaginary part, which would
    // pull std::sqrt onto the lower half-plane; the principal root of a
    // negative real lies on the upper half-plane
    if (disc.imag() == 0.0) disc = std::complex<double>(disc.real(), 0.0);
    return disc;
}

bool near_ep(const std::complex<double>& disc, const DampingParams& d) {
    const double k = d.kappa_p + d.kappa_m;
    return std::abs(disc) < 1e-6 * k * k;
}

// Nudges the branch pair by single ulps until the rounded sum reproduces the
// target exactly. Starting from b = target - a the sum is at most half an ulp
// off, so only round-to-even ties need correcting; walking the smaller
// component (the finer grid) settles those in one or two steps.
void force_exact_sum(double target, double& a, double& b) {
    b = target - a;
    for (int i = 0; i < 8 && a + b != target; ++i) {
        double& w = std::fabs(a) < std::fabs(b) ? a : b;
        const double toward = (a + b < target) ? std::numeric_limits<double>::infinity()
                                               : -std::numeric_limits<double>::infinity();
        w = std::nextafter(w, toward);
    }
}

} // namespace

void DampingParams::validate() const {
    require(kappa_p >= 0.0, "DampingParams: kappa_p must be >= 0");
    require(kappa_m >= 0.0, "DampingParams: kappa_m must be >= 0");
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::weak: return "weak";
        case Regime::purcell: return "purcell";
        case Regime::strong: return "strong";
    }
    return "?";
}

ComplexModes complex_eigenfrequencies(double f_p, double f_m,
                                      const DampingParams& damping, double G_eff) {
    damping.validate();
    require(G_eff >= 0.0, "complex_eigenfrequencies: G_eff must be >= 0");

    const std::complex<double> trace(f_p + f_m, -(damping.kappa_p + damping.kappa_m));
    const std::complex<double> disc = mode_discriminant(f_p, f_m, damping, G_eff);
    const std::complex<double> s = 0.5 * std::sqrt(disc);

    ComplexModes out;
    out.plus = 0.5 * trace + s;
    double pr = out.plus.real(), pi = out.plus.imag();
    double mr, mi;
    force_exact_sum(trace.real(), pr, mr);
    force_exact_sum(trace.imag(), pi, mi);
    out.plus = std::complex<double>(pr, pi);
    out.minus = std::complex<double>(mr, mi); // plus + minus == trace exactly
    out.near_exceptional_point = near_ep(disc, damping);
    return out;
}

std::vector<ComplexModes> complex_eigenfrequencies_sweep(const std::vector<double>& f_m_values,
                                                         double f_p,
                                                         const DampingParams& damping,
                                                         double G_eff) {
    std::vector<ComplexModes> out;
    out.reserve(f_m_values.size());
    for (double f_m : f_m_values) {
        ComplexModes modes = complex_eigenfrequencies(f_p, f_m, damping, G_eff);
        if (!out.empty()) {
            // assign branches by continuity, not by the principal-root sign
            const ComplexModes& prev = out.back();
            const double keep = std::abs(modes.plus - prev.plus) +
                                std::abs(modes.minus - prev.minus);
            const double swap = std::abs(modes.minus - prev.plus) +
                                std::abs(modes.plus - prev.minus);
            if (swap < keep) std::swap(modes.plus, modes.minus);
        }
        out.push_back(modes);
    }
    return out;
}

FrequencyPair rwa_frequencies(double f_p, double f_m, double G_eff) {
    require(G_eff >= 0.0, "rwa_frequencies: G_eff must be >= 0");
    const double mid = 0.5 * (f_m + f_p);
    const double diff = f_p - f_m;
    const double half_split = 0.5 * std::sqrt(diff * diff + 4.0 * G_eff * G_eff);
    FrequencyPair out;
    out.f_upper = mid + half_split;
    out.f_lower = mid - half_split;
    return out;
}

LinewidthPair rwa_linewidths(double f_p, double f_m, const DampingParams& damping,
                             double G_eff) {
    damping.validate();
    require(G_eff >= 0.0, "rwa_linewidths: G_eff must be >= 0");

    const double sum = damping.kappa_p + damping.kappa_m;
    const double mean = 0.5 * sum;
    const double diff = f_p - f_m;
    const double denom = std::sqrt(diff * diff + 4.0 * G_eff * G_eff);
    const double term =
        denom == 0.0 ? 0.0 : 0.5 * (damping.kappa_p - damping.kappa_m) * diff / denom;

    // build the larger value first, then take the exact complement so that
    // kappa_plus + kappa_minus == kappa_p + kappa_m holds bit-exactly
    const double big = mean + std::abs(term);
    const double small = sum - big;
    LinewidthPair out;
    out.kappa_plus = term >= 0.0 ? big : small;
    out.kappa_minus = term >= 0.0 ? small : big;
    return out;
}

double cooperativity(double G_eff, const DampingParams& damping) {
    damping.validate();
    require(G_eff >= 0.0, "cooperativity: G_eff must be >= 0");
    if (damping.kappa_p <= 0.0 || damping.kappa_m <= 0.0)
        throw std::domain_error("cooperativity: both damping rates must be > 0");
    return G_eff * G_eff / (damping.kappa_m * damping.kappa_p);
}

RegimeReport classify_regime(double G_eff, const DampingParams& damping) {
    damping.validate();
    require(G_eff >= 0.0, "classify_regime: G_eff must be >= 0");

    RegimeReport report;
    const double kp = damping.kappa_p;
    const double km = damping.kappa_m;
    if (G_eff > kp && G_eff > km)
        report.regime = Regime::strong;
    else if ((kp < G_eff && G_eff < km) || (km < G_eff && G_eff < kp))
        report.regime = Regime::purcell;
    else
        report.regime = Regime::weak;

    report.cooperativity = (kp > 0.0 && km > 0.0)
                               ? cooperativity(G_eff, damping)
                               : std::numeric_limits<double>::quiet_NaN();
    return report;
}

nlohmann::json regime_report_json(const RegimeReport& report, double G_eff,
                                  const DampingParams& damping) {
    return nlohmann::json{{"regime", to_string(report.regime)},
                          {"cooperativity", report.cooperativity},
                          {"G_eff_MHz", G_eff / 1e6},
                          {"kappa_p_MHz", damping.kappa_p / 1e6},
                          {"kappa_m_MHz", damping.kappa_m / 1e6}};
}

} // namespace magpol
