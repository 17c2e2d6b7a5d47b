#include "magpol/spectrum.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "magpol/constants.hpp"
#include "magpol/rng.hpp"

namespace magpol {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void require_axis(const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw std::invalid_argument(std::string(name) + " axis is empty");
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (!(axis[i] > axis[i - 1]))
            throw std::invalid_argument(std::string(name) +
                                        " axis must be strictly increasing");
}

// Eq.-(5)-style notch response in rate form. sigma is the extra self-energy in
// the resonator denominator (0 for the bare resonator), so bare and coupled
// spectra share one code path and agree bit-exactly when sigma = 0.
std::complex<double> notch_response(double f, const ResonatorLineShape& shape,
                                    const std::complex<double>& sigma) {
    const double q_tot = total_Q(shape.Q_int, shape.Q_ext_mag);
    const double kappa_tot = shape.f_r / (2.0 * q_tot);
    const double kappa_ext = shape.f_r / (2.0 * shape.Q_ext_mag);

    const std::complex<double> mismatch = std::polar(kappa_ext, shape.phi);
    const std::complex<double> denom(kappa_tot + sigma.real(), f - shape.f_r + sigma.imag());
    const std::complex<double> bracket = 1.0 - mismatch / denom;

    const std::complex<double> env =
        std::polar(shape.env_amp,
                   shape.env_phase - constants::two_pi * f * shape.cable_delay);
    return env * bracket;
}

std::complex<double> magnon_self_energy(double f, double f_m, double G_eff,
                                        double kappa_m) {
    if (G_eff == 0.0) return {0.0, 0.0};
    const std::complex<double> denom(kappa_m, f - f_m);
    return G_eff * G_eff / denom;
}

SpectrumGrid synthesize_impl(const ResonatorLineShape& shape, const PolaritonModel& model,
                             const DampingParams& damping,
                             const std::vector<double>& field_axis,
                             const std::vector<double>& freq_axis, bool parallel) {
    shape.validate();
    model.validate();
    damping.validate();
    require_axis(field_axis, "field");
    require_axis(freq_axis, "frequency");

    SpectrumGrid grid;
    grid.kind = SpectrumGrid::Kind::complex_s21;
    grid.field_axis = field_axis;
    grid.freq_axis = freq_axis;
    grid.values.resize(field_axis.size() * freq_axis.size());

    const auto n_rows = static_cast<std::ptrdiff_t>(field_axis.size());
    const auto n_cols = static_cast<std::ptrdiff_t>(freq_axis.size());
    const double G_eff = model.coupling.effective();

#pragma omp parallel for collapse(2) schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < n_rows; ++i) {
        for (std::ptrdiff_t j = 0; j < n_cols; ++j) {
            const double f_m = model.magnon_frequency(field_axis[i]);
            const std::complex<double> sigma =
                magnon_self_energy(freq_axis[j], f_m, G_eff, damping.kappa_m);
            grid.values[i * n_cols + j] = notch_response(freq_axis[j], shape, sigma);
        }
    }
    return grid;
}

SpectrumGrid add_noise_impl(const SpectrumGrid& grid, double snr_db, std::uint64_t seed,
                            bool parallel) {
    grid.validate();
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("add_noise: snr_db must be finite or +inf");
    if (snr_db == std::numeric_limits<double>::infinity()) return grid;

    // mean signal power sets the noise scale
    double power = 0.0;
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        const double m = grid.values[i].real();
        power += grid.kind == SpectrumGrid::Kind::magnitude ? m * m
                                                            : std::norm(grid.values[i]);
    }
    power /= static_cast<double>(grid.values.size());
    const double sigma_q = std::sqrt(0.5 * power / std::pow(10.0, snr_db / 10.0));

    SpectrumGrid out = grid;
    const auto n_rows = static_cast<std::ptrdiff_t>(grid.rows());
    const auto n_cols = static_cast<std::ptrdiff_t>(grid.cols());
    const bool magnitude = grid.kind == SpectrumGrid::Kind::magnitude;

#pragma omp parallel for collapse(2) schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < n_rows; ++i) {
        for (std::ptrdiff_t j = 0; j < n_cols; ++j) {
            detail::SplitMix64 stream = detail::cell_stream(seed, i, j);
            const auto [n1, n2] = detail::gaussian_pair(stream);
            const std::complex<double> noise(sigma_q * n1, sigma_q * n2);
            std::complex<double>& cell = out.values[i * n_cols + j];
            // a magnitude sample acquires complex noise before detection
            cell = magnitude ? std::abs(cell.real() + noise) : cell + noise;
        }
    }
    return out;
}

} // namespace

namespace detail {

std::pair<double, double> gaussian_pair(SplitMix64& g) {
    const double u1 = uniform_pos(g);
    const double u2 = uniform_pos(g);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = constants::two_pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

} // namespace detail

void ResonatorLineShape::validate() const {
    require(f_r > 0.0, "ResonatorLineShape: f_r must be > 0");
    require(Q_int > 0.0, "ResonatorLineShape: Q_int must be > 0");
    require(Q_ext_mag > 0.0, "ResonatorLineShape: Q_ext_mag must be > 0");
    require(env_amp >= 0.0, "ResonatorLineShape: env_amp must be >= 0");
}

double total_Q(double Q_int, double Q_ext_mag) {
    require(Q_int > 0.0, "total_Q: Q_int must be > 0");
    require(Q_ext_mag > 0.0, "total_Q: Q_ext_mag must be > 0");
    return 1.0 / (1.0 / Q_ext_mag + 1.0 / Q_int);
}

std::complex<double> bare_s21(double f, const ResonatorLineShape& shape) {
    shape.validate();
    require(f > 0.0, "bare_s21: f must be > 0");
    return notch_response(f, shape, {0.0, 0.0});
}

std::complex<double> coupled_s21(double f, double mu0_H, const ResonatorLineShape& shape,
                                 const PolaritonModel& model, const DampingParams& damping) {
    shape.validate();
    model.validate();
    damping.validate();
    require(f > 0.0, "coupled_s21: f must be > 0");
    const double f_m = model.magnon_frequency(mu0_H);
    const std::complex<double> sigma =
        magnon_self_energy(f, f_m, model.coupling.effective(), damping.kappa_m);
    return notch_response(f, shape, sigma);
}

double SpectrumGrid::magnitude_at(std::size_t row, std::size_t col) const {
    const std::complex<double>& v = at(row, col);
    return kind == Kind::magnitude ? v.real() : std::abs(v);
}

void SpectrumGrid::validate() const {
    require_axis(field_axis, "field");
    require_axis(freq_axis, "frequency");
    require(values.size() == field_axis.size() * freq_axis.size(),
            "SpectrumGrid: value matrix does not match axes");
}

SpectrumGrid synthesize_grid(const ResonatorLineShape& shape, const PolaritonModel& model,
                             const DampingParams& damping,
                             const std::vector<double>& field_axis,
                             const std::vector<double>& freq_axis) {
    return synthesize_impl(shape, model, damping, field_axis, freq_axis, true);
}

SpectrumGrid normalize_grid(const SpectrumGrid& grid, double reference_field) {
    grid.validate();
    require(reference_field >= grid.field_axis.front() &&
                reference_field <= grid.field_axis.back(),
            "normalize_grid: reference field outside the measured range");

    // nearest grid row; the field actually used is recorded
    std::size_t ref_row = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.rows(); ++i) {
        const double d = std::abs(grid.field_axis[i] - reference_field);
        if (d < best) {
            best = d;
            ref_row = i;
        }
    }

    std::vector<double> ref(grid.cols());
    for (std::size_t j = 0; j < grid.cols(); ++j) {
        ref[j] = grid.magnitude_at(ref_row, j);
        if (ref[j] == 0.0)
            throw std::domain_error("normalize_grid: reference trace contains a zero");
    }

    SpectrumGrid out;
    out.kind = SpectrumGrid::Kind::magnitude;
    out.field_axis = grid.field_axis;
    out.freq_axis = grid.freq_axis;
    out.reference_field = grid.field_axis[ref_row];
    out.values.resize(grid.values.size());
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j)
            out.values[i * grid.cols() + j] = grid.magnitude_at(i, j) / ref[j];
    return out;
}

SpectrumGrid add_noise(const SpectrumGrid& grid, double snr_db, std::uint64_t seed) {
    return add_noise_impl(grid, snr_db, seed, true);
}

namespace reference {

SpectrumGrid synthesize_grid_serial(const ResonatorLineShape& shape,
                                    const PolaritonModel& model,
                                    const DampingParams& damping,
                                    const std::vector<double>& field_axis,
                                    const std::vector<double>& freq_axis) {
    return synthesize_impl(shape, model, damping, field_axis, freq_axis, false);
}

SpectrumGrid add_noise_serial(const SpectrumGrid& grid, double snr_db, std::uint64_t seed) {
    return add_noise_impl(grid, snr_db, seed, false);
}

} // namespace reference

} // namespace magpol
