#include "magpol/polariton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "magpol/errors.hpp"

namespace magpol {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

[[noreturn]] void throw_supercritical(double det, double f_p, double f_m) {
    throw SupercriticalError(
        "parameter point at or past the superradiant instability (det(M) = " +
            std::to_string(det) + ", f_p = " + std::to_string(f_p) +
            " Hz, f_m = " + std::to_string(f_m) + " Hz)",
        det);
}

double photon_weight(const Eigen::Vector4cd& v) {
    return std::norm(v(0)) - std::norm(v(2));
}

double symplectic_norm(const Eigen::Vector4cd& v) {
    return std::norm(v(0)) + std::norm(v(1)) - std::norm(v(2)) - std::norm(v(3));
}

} // namespace

void PolaritonModel::validate() const {
    require(f_p > 0.0, "PolaritonModel: f_p must be > 0");
    magnon.validate();
    coupling.validate();
    dia.validate();
    if (variant == ModelVariant::rwa && dia.mode != DiamagneticSpec::Mode::none)
        throw std::invalid_argument(
            "PolaritonModel: the rwa variant carries no quadratic term (dia mode must be none)");
}

double PolaritonModel::magnon_frequency(double mu0_H) const {
    return kittel_frequency(mu0_H, magnon);
}

Eigen::Matrix4d hopfield_matrix(double f_p, double f_m, double g_prime, double D) {
    require(f_p > 0.0, "hopfield_matrix: f_p must be > 0");
    require(f_m >= 0.0, "hopfield_matrix: f_m must be >= 0");
    require(g_prime >= 0.0, "hopfield_matrix: g_prime must be >= 0");
    Eigen::Matrix4d s;
    s << f_p + 2.0 * D, g_prime, 2.0 * D, g_prime,
         g_prime, f_m, g_prime, 0.0,
         2.0 * D, g_prime, f_p + 2.0 * D, g_prime,
         g_prime, 0.0, g_prime, f_m;
    Eigen::Matrix4d m = s;
    m.col(2) *= -1.0;
    m.col(3) *= -1.0;
    return m;
}

double det_hopfield(double f_p, double f_m, double g_prime, double D) {
    return f_p * f_m * (4.0 * D * f_m - 4.0 * g_prime * g_prime + f_p * f_m);
}

HopfieldModes solve_hopfield_modes(double f_p, double f_m, double g_prime, double D) {
    const Eigen::Matrix4d m = hopfield_matrix(f_p, f_m, g_prime, D);
    if (f_m <= 0.0) throw_supercritical(0.0, f_p, f_m); // zero-frequency soft mode

    Eigen::EigenSolver<Eigen::Matrix4d> es(m, /*computeEigenvectors=*/true);
    const Eigen::Vector4cd lambda = es.eigenvalues();

    const double scale = m.cwiseAbs().maxCoeff();
    for (int i = 0; i < 4; ++i) {
        if (std::abs(lambda(i).imag()) > 1e-8 * scale)
            throw_supercritical(det_hopfield(f_p, f_m, g_prime, D), f_p, f_m);
    }

    // spectrum is {+f_lower, +f_upper, -f_lower, -f_upper}; keep the positives
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return lambda(a).real() > lambda(b).real();
    });
    const double upper = lambda(idx[0]).real();
    const double lower = lambda(idx[1]).real();
    if (lower <= 0.0)
        throw_supercritical(det_hopfield(f_p, f_m, g_prime, D), f_p, f_m);

    HopfieldModes modes;
    modes.frequencies << lower, upper;
    for (int k = 0; k < 2; ++k) {
        Eigen::Vector4cd v = es.eigenvectors().col(idx[1 - k]); // k=0 lower, k=1 upper
        const double n = symplectic_norm(v);
        if (n <= 0.0)
            throw_supercritical(det_hopfield(f_p, f_m, g_prime, D), f_p, f_m);
        v /= std::sqrt(n);
        modes.vectors.col(k) = v;
    }
    return modes;
}

BranchPair solve_hopfield(double f_p, double f_m, double g_prime, double D) {
    const HopfieldModes modes = solve_hopfield_modes(f_p, f_m, g_prime, D);
    BranchPair out;
    out.f_lower = modes.frequencies(0);
    out.f_upper = modes.frequencies(1);
    out.photon_fraction_lower = photon_weight(modes.vectors.col(0));
    out.photon_fraction_upper = photon_weight(modes.vectors.col(1));
    return out;
}

BranchPair solve_rwa_block(double f_p, double f_m, double g_prime) {
    require(f_p > 0.0, "solve_rwa_block: f_p must be > 0");
    require(f_m >= 0.0, "solve_rwa_block: f_m must be >= 0");
    require(g_prime >= 0.0, "solve_rwa_block: g_prime must be >= 0");
    Eigen::Matrix2d block;
    block << f_p, g_prime, g_prime, f_m;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block);
    const double lower = es.eigenvalues()(0);
    const double upper = es.eigenvalues()(1);
    if (lower <= 0.0)
        throw SupercriticalError(
            "co-rotating block has a non-positive mode (g'^2 >= f_p*f_m)",
            f_p * f_m - g_prime * g_prime);
    BranchPair out;
    out.f_lower = lower;
    out.f_upper = upper;
    // eigenvectors are real; photon weight is the squared photon component
    out.photon_fraction_lower = es.eigenvectors()(0, 0) * es.eigenvectors()(0, 0);
    out.photon_fraction_upper = es.eigenvectors()(0, 1) * es.eigenvectors()(0, 1);
    return out;
}

BranchPair polariton_frequencies_eig(const PolaritonModel& model, double mu0_H) {
    model.validate();
    const double f_m = model.magnon_frequency(mu0_H);
    const double g_prime = rescaled_coupling(model.coupling.effective(), f_m, model.f_p);
    switch (model.variant) {
        case ModelVariant::rwa:
            return solve_rwa_block(model.f_p, f_m, g_prime);
        case ModelVariant::dicke:
            return solve_hopfield(model.f_p, f_m, g_prime, 0.0);
        case ModelVariant::hopfield: {
            if (f_m <= 0.0) throw_supercritical(0.0, model.f_p, f_m);
            const double D = diamagnetic_D(model.dia, f_m, g_prime);
            return solve_hopfield(model.f_p, f_m, g_prime, D);
        }
    }
    throw std::logic_error("polariton_frequencies_eig: unreachable");
}

BranchPair polariton_frequencies_quartic(double f_p, double f_m, double G_eff,
                                         const DiamagneticSpec& dia) {
    require(f_p > 0.0, "polariton_frequencies_quartic: f_p must be > 0");
    require(f_m >= 0.0, "polariton_frequencies_quartic: f_m must be >= 0");
    require(G_eff >= 0.0, "polariton_frequencies_quartic: G_eff must be >= 0");
    if (f_m <= 0.0) throw_supercritical(0.0, f_p, f_m);

    const double g_prime = rescaled_coupling(G_eff, f_m, f_p);
    const double D = diamagnetic_D(dia, f_m, g_prime);

    // lambda^4 - s*lambda^2 + p = 0 with p = det(M)
    const double s = f_p * f_p + 4.0 * D * f_p + f_m * f_m;
    const double p = det_hopfield(f_p, f_m, g_prime, D);
    if (p <= 0.0) throw_supercritical(p, f_p, f_m);

    double disc = s * s - 4.0 * p;
    if (disc < 0.0) {
        // rounding can push the degenerate case a hair negative
        if (disc > -1e-10 * s * s) disc = 0.0;
        else throw_supercritical(p, f_p, f_m);
    }
    const double hi = 0.5 * (s + std::sqrt(disc));
    const double lo = p / hi; // Vieta: immune to cancellation near criticality

    BranchPair out;
    out.f_upper = std::sqrt(hi);
    out.f_lower = std::sqrt(lo);
    return out;
}

namespace {

std::vector<DispersionPoint> dispersion_impl(const PolaritonModel& model,
                                             const std::vector<double>& field_grid,
                                             bool parallel) {
    model.validate();
    require(!field_grid.empty(), "dispersion: field grid must be non-empty");
    for (std::size_t i = 1; i < field_grid.size(); ++i)
        require(field_grid[i] > field_grid[i - 1],
                "dispersion: field grid must be strictly increasing");

    const auto n = static_cast<std::ptrdiff_t>(field_grid.size());
    std::vector<DispersionPoint> out(field_grid.size());
    std::vector<double> fail_det(field_grid.size(), 0.0);
    std::vector<unsigned char> failed(field_grid.size(), 0);

    // exceptions must not unwind across the parallel region; record and rethrow
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[i].mu0_H = field_grid[i];
            out[i].branches = polariton_frequencies_eig(model, field_grid[i]);
        } catch (const SupercriticalError& e) {
            failed[i] = 1;
            fail_det[i] = e.det_m();
        }
    }

    for (std::size_t i = 0; i < field_grid.size(); ++i) {
        if (failed[i])
            throw SupercriticalError("supercritical point in field sweep at mu0_H = " +
                                         std::to_string(field_grid[i] * 1e3) + " mT",
                                     fail_det[i], field_grid[i]);
    }
    return out;
}

} // namespace

std::vector<DispersionPoint> dispersion(const PolaritonModel& model,
                                        const std::vector<double>& field_grid) {
    return dispersion_impl(model, field_grid, true);
}

namespace reference {

std::vector<DispersionPoint> dispersion_serial(const PolaritonModel& model,
                                               const std::vector<double>& field_grid) {
    return dispersion_impl(model, field_grid, false);
}

} // namespace reference

double bloch_siegert_shift(const PolaritonModel& model, double mu0_H, Branch branch) {
    model.validate();
    if (model.variant == ModelVariant::rwa)
        throw std::invalid_argument(
            "bloch_siegert_shift: model variant must keep counter-rotating terms");

    const BranchPair full = polariton_frequencies_eig(model, mu0_H);

    const double f_m = model.magnon_frequency(mu0_H);
    const double g_prime = rescaled_coupling(model.coupling.effective(), f_m, model.f_p);
    const BranchPair rwa = solve_rwa_block(model.f_p, f_m, g_prime);

    return branch == Branch::lower ? full.f_lower - rwa.f_lower
                                   : full.f_upper - rwa.f_upper;
}

double bloch_siegert_estimate(double f_p, double f_m, double g_prime) {
    require(f_p > 0.0 && f_m >= 0.0, "bloch_siegert_estimate: bad frequencies");
    return g_prime * g_prime / (f_p + f_m);
}

double critical_coupling(double B, double f_p, double f_m) {
    require(f_p > 0.0, "critical_coupling: f_p must be > 0");
    require(f_m > 0.0, "critical_coupling: f_m must be > 0");
    require(B >= 0.0, "critical_coupling: B must be >= 0");
    if (B >= 1.0)
        throw NoGoLimitError(
            "B >= 1: quadratic term at or above the sum-rule bound, no critical coupling exists");
    return 0.5 * std::sqrt(f_p * f_m) / std::sqrt(1.0 - B);
}

TrkReport trk_analysis(double G_eff, double f_m, double D) {
    require(G_eff >= 0.0, "trk_analysis: G_eff must be >= 0");
    require(D >= 0.0, "trk_analysis: D must be >= 0");
    if (f_m <= 0.0) throw std::domain_error("trk_analysis: f_m = 0 is singular");
    TrkReport r;
    r.D_trk = G_eff * G_eff / f_m;
    r.B = D == 0.0 ? 0.0 : D / r.D_trk; // D > 0 with D_trk = 0 yields inf
    return r;
}

} // namespace magpol
