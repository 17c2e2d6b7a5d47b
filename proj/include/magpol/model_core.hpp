#pragma once

#include <string>

#include "magpol/constants.hpp"

// Closed-model parameter types and the coupling algebra shared by every other
// module. Unit convention throughout the library: frequencies and coupling
// strengths are linear frequencies in Hz (f = omega/2pi), static fields are
// mu0*H in Tesla, magnetizations are mu0*M in Tesla, lengths in metres.

namespace magpol {

// Uniform-precession (Kittel) magnon of a thin in-plane magnetized stripe.
struct MagnonParams {
    double gamma_over_2pi = constants::gamma_default; // gyromagnetic ratio [Hz/T]
    double mu0_Meff = 0.0;       // effective magnetization mu0*M_eff [T]
    double mu0_Ms = 0.0;         // saturation magnetization mu0*M_s [T]
    double stripe_width = 0.0;   // [m], optional geometry (only spin_count reads it)
    double stripe_length = 0.0;  // [m]
    double film_thickness = 0.0; // [m]

    void validate() const; // throws std::invalid_argument
};

// Coupling strength bookkeeping. Either constructed bottom-up from the
// single-moment coupling g_s and the spin count N (optionally scaled to n
// identical elements driving the same collective mode), or top-down from a
// measured effective coupling.
struct CouplingParams {
    double g_s = 0.0;            // single Bohr-magneton coupling [Hz], 0 if unknown
    double N = 0.0;              // spins per element, 0 if unknown
    int n = 1;                   // number of identical elements, 0 decouples
    double G_eff_over_2pi = 0.0; // effective (bright-mode) coupling [Hz]

    static CouplingParams from_g_s(double g_s, double N, int n = 1);
    static CouplingParams from_G_eff(double G_eff, int n = 1);

    double effective() const { return G_eff_over_2pi; }
    void validate() const;
};

// How the quadratic (diamagnetic) term D enters the model.
//   none:        D = 0
//   beta:        D = beta / ((2*pi)^2 * f_m), beta in (rad/s)^2
//   suppression: D = B * G'^2 / f_m, B dimensionless in [0, 1)
struct DiamagneticSpec {
    enum class Mode { none, beta, suppression };

    Mode mode = Mode::none;
    double beta = 0.0; // [(rad/s)^2]
    double B = 0.0;    // fraction of the sum-rule value

    static DiamagneticSpec off() { return {}; }
    static DiamagneticSpec from_beta(double beta);
    static DiamagneticSpec from_suppression(double B);

    void validate() const;
};

// Which Hamiltonian the solvers diagonalize:
//   hopfield: counter-rotating terms and the quadratic D term
//   dicke:    counter-rotating terms, D forced to 0
//   rwa:      co-rotating terms only (2x2 block)
enum class ModelVariant { hopfield, dicke, rwa };

const char* to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& s);

// (f_upper, f_lower) of a two-branch spectrum, both in Hz.
struct FrequencyPair {
    double f_upper = 0.0;
    double f_lower = 0.0;
};

// eta = G_eff / f_p; ultrastrong once eta exceeds 0.1.
inline constexpr double ultrastrong_threshold = 0.1;

struct CouplingRatio {
    double eta = 0.0;
    bool ultrastrong = false;
};

// Kittel dispersion f_m = gamma' * sqrt(|mu0_H| * (|mu0_H| + mu0_Meff)).
// Negative fields fold onto |mu0_H|: the uniform mode sees field magnitude.
double kittel_frequency(double mu0_H, const MagnonParams& params);

// Applied field (>= 0) that puts the Kittel mode at f_m; inverse of the above.
double kittel_field(double f_m, const MagnonParams& params);

// g_0 = g_s * sqrt(N)
double collective_coupling(double g_s, double N);

// G_eff = g_0 * sqrt(n), bright mode of n identical elements
double bright_mode_coupling(double g_0, int n);

// epsilon = G_eff / sqrt(f_p)  [sqrt(Hz)]
double normalized_coupling(double G_eff, double f_p);

CouplingRatio coupling_ratio(double G_eff, double f_p);

// G' = G_eff * sqrt(f_m / f_p); the coupling entering the Hopfield matrix
double rescaled_coupling(double G_eff, double f_m, double f_p);

// Quadratic-term magnitude D in Hz for the given convention. g_prime is only
// read in suppression mode. Throws std::domain_error at f_m = 0 unless the
// mode is none.
double diamagnetic_D(const DiamagneticSpec& spec, double f_m, double g_prime);

// N = M_s * V / mu_B from the stripe geometry; zero volume gives 0.
double spin_count(const MagnonParams& params);

} // namespace magpol
