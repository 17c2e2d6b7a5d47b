#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "magpol/spectrum.hpp"

// Minimal self-contained SVG renderings for --emit-plots. The CSVs stay the
// source of truth; these exist for quick visual inspection only.

namespace magpol::cli {

struct Series {
    std::string label;
    std::string color; // CSS color
    std::vector<double> x;
    std::vector<double> y;
};

// Line chart; non-finite samples split the polyline.
void write_line_svg(const std::filesystem::path& path, const std::vector<Series>& series,
                    const std::string& x_label, const std::string& y_label,
                    const std::string& title);

// Magnitude heatmap of a spectrum grid, downsampled to at most 128 cells per
// axis to keep the file size sane.
void write_heatmap_svg(const std::filesystem::path& path, const SpectrumGrid& grid,
                       const std::string& title);

} // namespace magpol::cli
