#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "magpol/open_system.hpp"
#include "magpol/polariton.hpp"
#include "magpol/spectrum.hpp"

// JSON run configuration. Every physical key carries a unit suffix
// (f_p_GHz, mu0_H_mT, kappa_p_MHz, tau_ns, ...); unknown keys are rejected so
// typos cannot silently fall back to defaults. Values are stored SI (Hz, T, s)
// once parsed.

namespace magpol::cli {

struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    int count = 0;

    std::vector<double> values() const;
};

// one (element count, effective coupling) variant for scaling analyses
struct CouplingSample {
    double n = 0.0;
    std::optional<double> G_eff;   // [Hz]
    std::optional<double> epsilon; // [sqrt(Hz)], alternative to G_eff
};

struct FitSpec {
    enum class Kind { dispersion, resonator, linewidths };
    Kind kind = Kind::dispersion;
    std::filesystem::path points_csv; // dispersion / linewidths input
    std::filesystem::path trace_csv;  // resonator input (f_GHz, re, im)
    bool fit_beta = false;
    std::optional<double> f_p_init;      // [Hz]
    std::optional<double> mu0_Meff_init; // [T]
    std::optional<double> G_eff_init;    // [Hz]
    std::optional<double> beta_init;     // [(rad/s)^2]
    std::optional<double> kappa_p_init;  // [Hz]
    std::optional<double> kappa_m_init;  // [Hz]
};

struct BsSpec {
    Branch scaling_branch = Branch::lower;
    std::vector<CouplingSample> couplings;   // optional (n, G) variants
    std::vector<double> scaling_fields;      // [T]; default: last grid field
};

struct ReportSpec {
    std::optional<double> f_m;   // [Hz]
    std::optional<double> mu0_H; // [T]; exactly one of the two is required
};

struct RunConfig {
    PolaritonModel model;
    bool has_model = false;
    std::optional<GridSpec> field_grid; // [T]
    std::optional<GridSpec> freq_grid;  // [Hz]
    std::optional<ResonatorLineShape> resonator;
    std::optional<DampingParams> damping;
    std::optional<double> snr_db;
    std::optional<double> reference_field; // [T]
    std::uint64_t seed = 0;
    std::optional<FitSpec> fit;
    std::vector<CouplingSample> scaling_samples;
    std::optional<BsSpec> bloch_siegert;
    std::optional<ReportSpec> report;
    std::filesystem::path base_dir; // config file's directory, for relative paths
};

// Throws std::runtime_error with a single-line "config: ..." message on any
// schema violation.
RunConfig load_config(const std::filesystem::path& path);

} // namespace magpol::cli
