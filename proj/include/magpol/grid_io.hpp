#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magpol/spectrum.hpp"

// File formats shared by the synthesis and fitting paths: grid CSVs (fields in
// mT down the rows, frequencies in GHz across the columns), a JSON sidecar
// carrying full-precision axes and run metadata, and the extracted-points CSV.

namespace magpol {

// fixed %.12g cell format; deterministic across runs and locales
std::string format_value(double v);

struct GridFiles {
    std::vector<std::filesystem::path> csv; // one file (magnitude) or mag+phase pair
    std::filesystem::path sidecar;
};

// base path without extension; complex grids write <base>_mag.csv and
// <base>_phase.csv, magnitude grids write <base>.csv, both plus
// <base>.meta.json. extra_metadata is merged into the sidecar.
GridFiles write_grid(const std::filesystem::path& base, const SpectrumGrid& grid,
                     const nlohmann::json& extra_metadata = nlohmann::json::object());

// inverse of write_grid; prefers sidecar axes (exact), falls back to headers
SpectrumGrid read_grid(const std::filesystem::path& base);

// one extracted dispersion point: "mu0_H_mT, f_GHz, branch, hwhm_MHz"
struct PointRow {
    double mu0_H = 0.0; // [T]
    double f = 0.0;     // [Hz]
    std::string branch = "auto"; // lower | upper | auto
    std::optional<double> hwhm;  // [Hz]
};

void write_points_csv(const std::filesystem::path& path, const std::vector<PointRow>& rows);
std::vector<PointRow> read_points_csv(const std::filesystem::path& path);

} // namespace magpol
