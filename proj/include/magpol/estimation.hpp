#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "magpol/levmar.hpp"
#include "magpol/model_core.hpp"
#include "magpol/open_system.hpp"
#include "magpol/polariton.hpp"
#include "magpol/spectrum.hpp"

// Parameter estimation: peak extraction from measured traces, the bare
// resonator fit, dispersion and linewidth fits against the polariton models,
// and the closed-form scaling fits.

namespace magpol {

// ---------------------------------------------------------------------------
// peak extraction

struct Peak {
    double frequency = 0.0;  // Hz, parabolically refined
    double amplitude = 0.0;  // trace value at the refined apex
    double hwhm = 0.0;       // Hz, from the half-prominence crossings
    double prominence = 0.0; // apex height above the trace median
};

struct PeakConfig {
    double threshold_mads = 3.0; // required height above the median, in MADs
    std::size_t max_peaks = 0;   // 0 keeps all, else the most prominent ones
};

// Local maxima above median + threshold_mads * MAD, apex refined by a 3-point
// parabola, widths from linear interpolation of the half-prominence crossings.
// Sorted by frequency. Needs at least 8 samples and a strictly increasing
// frequency axis; a flat trace yields no peaks.
std::vector<Peak> extract_peaks(const std::vector<double>& freq,
                                const std::vector<double>& value,
                                const PeakConfig& config = {});

// The same detector on the negated trace; amplitude reports the original
// (minimum) trace value. For absorption dips in |S21|-style data.
std::vector<Peak> extract_dips(const std::vector<double>& freq,
                               const std::vector<double>& value,
                               const PeakConfig& config = {});

// ---------------------------------------------------------------------------
// fit results

struct FitParameter {
    std::string name;
    std::string unit;
    double value = 0.0;
    double sigma = 0.0; // one standard error; 0 when not converged
};

struct FitResult {
    std::vector<FitParameter> parameters;
    bool converged = false;
    FitStatus status = FitStatus::max_iterations;
    std::string message;
    double residual_rms = 0.0;
    int iterations = 0;

    bool has(std::string_view name) const;
    double value(std::string_view name) const; // throws std::out_of_range
    double sigma(std::string_view name) const;
};

nlohmann::json fit_result_json(const FitResult& fit);

// ---------------------------------------------------------------------------
// bare resonator

struct ComplexTrace {
    std::vector<double> freq;             // Hz, strictly increasing
    std::vector<std::complex<double>> s21;
};

// Seven-parameter notch fit {f_r, Q_int, Q_ext_mag, phi, env_amp, env_phase,
// tau}. Starting values come from the trace itself (cable delay from the
// off-resonant phase slope, f_r from the deepest sample, Q from the
// half-depth width) unless an explicit initial shape is supplied. The trace
// should cover several linewidths on both sides of the dip.
FitResult fit_bare_resonator(const ComplexTrace& trace,
                             const std::optional<ResonatorLineShape>& init = {});

ResonatorLineShape line_shape_from_fit(const FitResult& fit);

// ---------------------------------------------------------------------------
// dispersion and linewidth fits

struct ObservedPoint {
    double mu0_H = 0.0;           // T, must be nonzero
    double f = 0.0;               // Hz
    std::optional<Branch> branch; // empty = assign to the nearer branch
    std::optional<double> hwhm;   // Hz, only read by fit_linewidths
};

struct DispersionFitConfig {
    ModelVariant variant = ModelVariant::dicke;
    double gamma_over_2pi = constants::gamma_default; // held fixed
    bool fit_beta = false; // add the quadratic-term scale; hopfield only
    // optional overrides for the data-driven starting values
    std::optional<double> f_p_init;
    std::optional<double> mu0_Meff_init;
    std::optional<double> G_eff_init;
    std::optional<double> beta_init;
    int max_branch_passes = 8;
    LevmarOptions levmar;
};

// Least squares over {f_p, mu0_Meff, G_eff} (+ beta_dia when fit_beta) against
// the selected variant's branch frequencies. Untagged points are re-assigned
// to the nearer branch before each solver pass until the assignment is stable;
// a distance tie goes to the branch with the larger photon fraction.
// Parameter sets that drive any point supercritical are rejected as
// infeasible, so the search cannot step across the instability.
FitResult fit_dispersion(const std::vector<ObservedPoint>& points,
                         const DispersionFitConfig& config = {});

struct LinewidthFitConfig {
    double f_p = 0.0;       // held fixed [Hz]
    double mu0_Meff = 0.0;  // held fixed [T]
    double gamma_over_2pi = constants::gamma_default; // held fixed
    std::optional<double> G_eff_init;
    std::optional<double> kappa_p_init;
    std::optional<double> kappa_m_init;
    int max_branch_passes = 8;
    LevmarOptions levmar;
};

struct LinewidthFit {
    FitResult fit;
    RegimeReport regime;
};

// Joint fit of {G_eff, kappa_p, kappa_m} against the co-rotating closed forms
// for both the branch positions and the branch linewidths; every point must
// carry an observed half width. Regime classification uses the fitted values.
LinewidthFit fit_linewidths(const std::vector<ObservedPoint>& points,
                            const LinewidthFitConfig& config);

// ---------------------------------------------------------------------------
// scaling fits

struct ScalingSample {
    double n = 0.0;       // photon (or element) number, > 0
    double epsilon = 0.0; // normalized coupling G_eff / sqrt(f_p) [sqrt(Hz)]
};

struct SqrtScalingFit {
    double alpha = 0.0; // epsilon = alpha * sqrt(n) [sqrt(Hz)]
    double residual_rms = 0.0;
    bool identifiable = true;
};

// Zero-intercept least squares for epsilon = alpha * sqrt(n):
// alpha = sum(sqrt(n) * epsilon) / sum(n). A single sample determines alpha
// exactly; two or more samples sharing one n are flagged unidentifiable.
SqrtScalingFit fit_sqrt_n_scaling(const std::vector<ScalingSample>& samples);

// g_s = alpha * sqrt(f_p) / sqrt(N), single-moment coupling from the scaling
// amplitude; all arguments must be positive.
double infer_gs(double alpha, double f_p, double N);

struct BsSample {
    double epsilon_sq = 0.0;   // G_eff^2 / f_p [Hz]
    double delta_f_bs = 0.0;   // branch shift [Hz]
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double residual_rms = 0.0;
    bool identifiable = true;
};

// Ordinary least squares line through (epsilon_sq, delta_f_bs); degenerate
// abscissas (fewer than two distinct values) are flagged unidentifiable.
LineFit fit_bs_scaling(const std::vector<BsSample>& samples);

} // namespace magpol
