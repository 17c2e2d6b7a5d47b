#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "magpol/model_core.hpp"

// Closed-system polariton spectra: the 4x4 Hopfield-Bogoliubov eigenproblem,
// the equivalent biquadratic fast path, field sweeps, the Bloch-Siegert shift
// and the superradiance criticality analysis.

namespace magpol {

struct PolaritonModel {
    double f_p = 0.0; // uncoupled photon frequency [Hz]
    MagnonParams magnon;
    CouplingParams coupling;
    DiamagneticSpec dia;
    ModelVariant variant = ModelVariant::hopfield;

    void validate() const;
    double magnon_frequency(double mu0_H) const; // Kittel dispersion
};

// Two positive-frequency branches plus the photon weight of each eigenvector
// (|alpha|^2 - |gamma|^2 under the bosonic normalization, so photon and magnon
// weights sum to one per branch).
struct BranchPair {
    double f_upper = 0.0;
    double f_lower = 0.0;
    double photon_fraction_upper = 0.0;
    double photon_fraction_lower = 0.0;
};

enum class Branch { lower, upper };

// M of the bilinear eigenproblem: the symmetric coefficient block times
// diag(1,1,-1,-1), basis ordered (photon, magnon, photon^+, magnon^+).
Eigen::Matrix4d hopfield_matrix(double f_p, double f_m, double g_prime, double D);

// f_p*f_m*(4*D*f_m - 4*g'^2 + f_p*f_m); zero exactly at the critical point.
double det_hopfield(double f_p, double f_m, double g_prime, double D);

// Positive-frequency eigenpairs. Column 0 is the lower branch, column 1 the
// upper; vectors carry the bosonic normalization |a|^2+|b|^2-|c|^2-|d|^2 = 1.
struct HopfieldModes {
    Eigen::Vector2d frequencies; // [lower, upper]
    Eigen::Matrix<std::complex<double>, 4, 2> vectors;
};

// Full eigensolve of the 4x4; throws SupercriticalError when an eigenvalue is
// complex or non-positive (at or past the superradiant instability).
HopfieldModes solve_hopfield_modes(double f_p, double f_m, double g_prime, double D);
BranchPair solve_hopfield(double f_p, double f_m, double g_prime, double D);

// Co-rotating 2x2 block [[f_p, g'], [g', f_m]]; throws SupercriticalError when
// the lower eigenvalue is non-positive (g'^2 >= f_p*f_m).
BranchPair solve_rwa_block(double f_p, double f_m, double g_prime);

// Branch frequencies and photon fractions of the model's variant at one field.
BranchPair polariton_frequencies_eig(const PolaritonModel& model, double mu0_H);

// Closed-form biquadratic route (counter-rotating spectrum, frequencies only;
// fraction fields are left zero). Independent of the eigensolver path: used as
// the fast path and cross-checked against it.
BranchPair polariton_frequencies_quartic(double f_p, double f_m, double G_eff,
                                         const DiamagneticSpec& dia);

struct DispersionPoint {
    double mu0_H = 0.0;
    BranchPair branches;
};

// Field sweep, parallel over grid points. Grid must be non-empty and strictly
// increasing. A supercritical point aborts the sweep with the offending field.
std::vector<DispersionPoint> dispersion(const PolaritonModel& model,
                                        const std::vector<double>& field_grid);

// f_branch(counter-rotating variant) - f_branch(co-rotating block), signed.
// The model's variant selects the counter-rotating side; rwa is rejected.
double bloch_siegert_shift(const PolaritonModel& model, double mu0_H, Branch branch);

// Lowest-order magnitude estimate g'^2 / (f_p + f_m) of the shift.
double bloch_siegert_estimate(double f_p, double f_m, double g_prime);

// G'_c = sqrt(f_p*f_m)/2 / sqrt(1 - B); throws NoGoLimitError at B >= 1.
double critical_coupling(double B, double f_p, double f_m);

struct TrkReport {
    double D_trk = 0.0; // sum-rule value G_eff^2 / f_m [Hz]
    double B = 0.0;     // suppression factor D / D_trk
};

TrkReport trk_analysis(double G_eff, double f_m, double D);

namespace reference {

// Serial twin of dispersion(); bit-identical output, kept for kernel tests.
std::vector<DispersionPoint> dispersion_serial(const PolaritonModel& model,
                                               const std::vector<double>& field_grid);

} // namespace reference

} // namespace magpol
