#pragma once

#include <complex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magpol/model_core.hpp"

// Damped Tavis-Cummings analysis: complex eigenfrequencies of the two coupled
// lossy modes, the co-rotating closed forms for resonance positions and
// linewidths, cooperativity, and coupling-regime classification. All rates are
// HWHM in linear frequency (Hz).

namespace magpol {

struct DampingParams {
    double kappa_p = 0.0; // photon relaxation rate, HWHM [Hz]
    double kappa_m = 0.0; // magnon relaxation rate, HWHM [Hz]

    void validate() const;
};

enum class Regime { weak, purcell, strong };

const char* to_string(Regime r);

struct RegimeReport {
    Regime regime = Regime::weak;
    double cooperativity = 0.0;
};

// omega_tilde_± of the damped two-mode system. near_exceptional_point marks
// parameter points where the square-root argument nearly vanishes and the
// branch assignment becomes ill-conditioned.
struct ComplexModes {
    std::complex<double> plus;
    std::complex<double> minus;
    bool near_exceptional_point = false;
};

// (f_m + f_p - i(kp + km))/2 ± sqrt((f_p - f_m - i(km - kp))^2 + 4G^2)/2,
// principal square root. plus + minus equals (f_p + f_m) - i(kp + km) exactly.
ComplexModes complex_eigenfrequencies(double f_p, double f_m,
                                      const DampingParams& damping, double G_eff);

// Sweep over magnon frequencies at fixed f_p with branch assignment by
// continuity (nearest to the previous point), so branches do not swap when the
// sweep passes near an exceptional point.
std::vector<ComplexModes> complex_eigenfrequencies_sweep(const std::vector<double>& f_m_values,
                                                         double f_p,
                                                         const DampingParams& damping,
                                                         double G_eff);

// f_± = (f_m + f_p)/2 ± sqrt((f_p - f_m)^2 + 4G^2)/2 (upper = f_+).
FrequencyPair rwa_frequencies(double f_p, double f_m, double G_eff);

struct LinewidthPair {
    double kappa_plus = 0.0;  // linewidth of the f_+ branch [Hz]
    double kappa_minus = 0.0; // linewidth of the f_- branch [Hz]
};

// kappa_± = (km + kp)/2 ± (kp - km)/2 * (f_p - f_m)/sqrt((f_p - f_m)^2 + 4G^2).
// kappa_plus + kappa_minus equals kappa_p + kappa_m exactly.
LinewidthPair rwa_linewidths(double f_p, double f_m, const DampingParams& damping,
                             double G_eff);

// C = G^2 / (kappa_m * kappa_p); requires both rates > 0.
double cooperativity(double G_eff, const DampingParams& damping);

// strong: G above both rates; purcell: G strictly between them; weak
// otherwise. Boundary equalities fall toward the weaker regime.
RegimeReport classify_regime(double G_eff, const DampingParams& damping);

nlohmann::json regime_report_json(const RegimeReport& report, double G_eff,
                                  const DampingParams& damping);

} // namespace magpol
