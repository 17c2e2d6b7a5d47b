#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "magpol/open_system.hpp"
#include "magpol/polariton.hpp"

// Forward synthesis of complex transmission: notch-resonator line shape, the
// magnon-coupled line shape, 2D field-frequency grids, reference-trace
// normalization and reproducible noise injection.

namespace magpol {

// Notch resonator side-coupled to a feedline, plus the measurement
// environment (amplitude, global phase, cable delay).
struct ResonatorLineShape {
    double f_r = 0.0;       // resonance frequency [Hz]
    double Q_int = 0.0;     // internal quality factor
    double Q_ext_mag = 0.0; // |Q_ext|, external quality factor magnitude
    double phi = 0.0;       // impedance-mismatch phase [rad]
    double env_amp = 1.0;   // transmission amplitude away from resonance
    double env_phase = 0.0; // global phase [rad]
    double cable_delay = 0.0; // tau [s]

    void validate() const;
};

// Q = (1/Q_ext + 1/Q_int)^-1
double total_Q(double Q_int, double Q_ext_mag);

// a e^{i env_phase} e^{-2 pi i f tau} [1 - (Q/|Q_ext|) e^{i phi} / (1 + 2iQ(f/f_r - 1))]
std::complex<double> bare_s21(double f, const ResonatorLineShape& shape);

// Same line shape with the resonator denominator carrying the magnon
// self-energy G^2 / (i(f - f_m(H)) + kappa_m); reduces bit-exactly to
// bare_s21 when the model's coupling is zero.
std::complex<double> coupled_s21(double f, double mu0_H, const ResonatorLineShape& shape,
                                 const PolaritonModel& model, const DampingParams& damping);

// 2D transmission data over (field, frequency); row-major [field][freq].
// Magnitude grids keep their (real) values in the real part.
struct SpectrumGrid {
    enum class Kind { complex_s21, magnitude };

    Kind kind = Kind::complex_s21;
    std::vector<double> field_axis; // [T], strictly increasing
    std::vector<double> freq_axis;  // [Hz], strictly increasing
    std::vector<std::complex<double>> values;
    std::optional<double> reference_field; // [T], set once normalized

    std::size_t rows() const { return field_axis.size(); }
    std::size_t cols() const { return freq_axis.size(); }
    std::complex<double>& at(std::size_t row, std::size_t col) {
        return values[row * cols() + col];
    }
    const std::complex<double>& at(std::size_t row, std::size_t col) const {
        return values[row * cols() + col];
    }
    // magnitude of one cell regardless of kind
    double magnitude_at(std::size_t row, std::size_t col) const;

    void validate() const;
};

// coupled_s21 over the full grid; parallel over cells, order-independent.
SpectrumGrid synthesize_grid(const ResonatorLineShape& shape, const PolaritonModel& model,
                             const DampingParams& damping,
                             const std::vector<double>& field_axis,
                             const std::vector<double>& freq_axis);

// |S21| of each row divided by |S21| of the row nearest reference_field;
// result is a magnitude grid recording the reference actually used.
SpectrumGrid normalize_grid(const SpectrumGrid& grid, double reference_field);

// Complex Gaussian noise per cell with power = mean signal power / 10^(snr/10).
// snr_db = +infinity returns the grid unchanged. Same (grid, snr, seed) gives
// bit-identical output, parallel or not.
SpectrumGrid add_noise(const SpectrumGrid& grid, double snr_db, std::uint64_t seed);

namespace reference {

// Serial twins of the parallel kernels; bit-identical, kept for kernel tests.
SpectrumGrid synthesize_grid_serial(const ResonatorLineShape& shape,
                                    const PolaritonModel& model,
                                    const DampingParams& damping,
                                    const std::vector<double>& field_axis,
                                    const std::vector<double>& freq_axis);
SpectrumGrid add_noise_serial(const SpectrumGrid& grid, double snr_db, std::uint64_t seed);

} // namespace reference

} // namespace magpol
