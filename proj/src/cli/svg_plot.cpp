#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace magpol::cli {

namespace {

constexpr double width = 860.0;
constexpr double height = 560.0;
constexpr double margin_l = 76.0;
constexpr double margin_r = 24.0;
constexpr double margin_t = 42.0;
constexpr double margin_b = 56.0;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    double map(double v, double out_lo, double out_hi) const {
        const double t = (v - lo) / (hi - lo);
        return out_lo + t * (out_hi - out_lo);
    }
};

Range padded(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi) return {0.0, 1.0};
    if (lo == hi) return {lo - 0.5, hi + 0.5};
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

void open_svg(std::ofstream& out, const std::filesystem::path& path, const std::string& title) {
    out.open(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\""
        << " text-anchor=\"middle\">" << title << "</text>\n";
}

void draw_axes(std::ofstream& out, const Range& rx, const Range& ry, const std::string& x_label,
               const std::string& y_label) {
    out << "<rect x=\"" << margin_l << "\" y=\"" << margin_t << "\" width=\""
        << width - margin_l - margin_r << "\" height=\"" << height - margin_t - margin_b
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double t = i / 5.0;
        const double xv = rx.lo + t * (rx.hi - rx.lo);
        const double yv = ry.lo + t * (ry.hi - ry.lo);
        const double px = margin_l + t * (width - margin_l - margin_r);
        const double py = height - margin_b - t * (height - margin_t - margin_b);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << height - margin_b << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << height - margin_b + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << fmt(px) << "\" y=\"" << height - margin_b + 20
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
            << fmt_tick(xv) << "</text>\n"
            << "<line x1=\"" << margin_l - 5 << "\" y1=\"" << fmt(py) << "\" x2=\"" << margin_l
            << "\" y2=\"" << fmt(py) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << margin_l - 8 << "\" y=\"" << fmt(py + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
            << fmt_tick(yv) << "</text>\n";
    }
    out << "<text x=\"" << (margin_l + width - margin_r) / 2 << "\" y=\"" << height - 12
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << x_label
        << "</text>\n"
        << "<text x=\"18\" y=\"" << (margin_t + height - margin_b) / 2
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
        << " transform=\"rotate(-90 18 " << (margin_t + height - margin_b) / 2 << ")\">" << y_label
        << "</text>\n";
}

} // namespace

void write_line_svg(const std::filesystem::path& path, const std::vector<Series>& series,
                    const std::string& x_label, const std::string& y_label,
                    const std::string& title) {
    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -x_lo;
    double y_lo = x_lo;
    double y_hi = -x_lo;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    }
    const Range rx = padded(x_lo, x_hi);
    const Range ry = padded(y_lo, y_hi);

    std::ofstream out;
    open_svg(out, path, title);
    draw_axes(out, rx, ry, x_label, y_label);

    double legend_y = margin_t + 16.0;
    for (const auto& s : series) {
        std::string points;
        bool in_run = false;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                if (in_run) {
                    out << "<polyline fill=\"none\" stroke=\"" << s.color
                        << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
                    points.clear();
                    in_run = false;
                }
                continue;
            }
            const double px = rx.map(s.x[i], margin_l, width - margin_r);
            const double py = ry.map(s.y[i], height - margin_b, margin_t);
            points += fmt(px) + "," + fmt(py) + " ";
            in_run = true;
        }
        if (in_run)
            out << "<polyline fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
        if (!s.label.empty()) {
            out << "<line x1=\"" << width - margin_r - 150 << "\" y1=\"" << fmt(legend_y - 4)
                << "\" x2=\"" << width - margin_r - 126 << "\" y2=\"" << fmt(legend_y - 4)
                << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
                << "<text x=\"" << width - margin_r - 120 << "\" y=\"" << fmt(legend_y)
                << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
            legend_y += 16.0;
        }
    }
    out << "</svg>\n";
}

namespace {

// five-stop dark-to-bright map
void color_stops(double t, int& r, int& g, int& b) {
    static constexpr int stops[5][3] = {
        {13, 8, 135}, {126, 3, 168}, {204, 71, 120}, {248, 149, 64}, {240, 249, 33}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int k = std::min(static_cast<int>(t), 3);
    const double u = t - k;
    r = static_cast<int>(std::lround(stops[k][0] + u * (stops[k + 1][0] - stops[k][0])));
    g = static_cast<int>(std::lround(stops[k][1] + u * (stops[k + 1][1] - stops[k][1])));
    b = static_cast<int>(std::lround(stops[k][2] + u * (stops[k + 1][2] - stops[k][2])));
}

} // namespace

void write_heatmap_svg(const std::filesystem::path& path, const SpectrumGrid& grid,
                       const std::string& title) {
    grid.validate();
    const std::size_t rows = grid.rows();
    const std::size_t cols = grid.cols();
    const std::size_t stride_r = (rows + 127) / 128;
    const std::size_t stride_c = (cols + 127) / 128;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < rows; i += stride_r) {
        for (std::size_t j = 0; j < cols; j += stride_c) {
            const double v = grid.magnitude_at(i, j);
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(std::isfinite(lo) && std::isfinite(hi)) || lo == hi) {
        lo = 0.0;
        hi = lo + 1.0;
    }

    const Range rx{grid.freq_axis.front() / 1e9, grid.freq_axis.back() / 1e9};
    const Range ry{grid.field_axis.front() * 1e3, grid.field_axis.back() * 1e3};

    std::ofstream out;
    open_svg(out, path, title);
    draw_axes(out, rx, ry, "f (GHz)", "mu0_H (mT)");

    const double plot_w = width - margin_l - margin_r;
    const double plot_h = height - margin_t - margin_b;
    const std::size_t n_r = (rows + stride_r - 1) / stride_r;
    const std::size_t n_c = (cols + stride_c - 1) / stride_c;
    const double cell_w = plot_w / static_cast<double>(n_c);
    const double cell_h = plot_h / static_cast<double>(n_r);

    for (std::size_t bi = 0; bi < n_r; ++bi) {
        for (std::size_t bj = 0; bj < n_c; ++bj) {
            const double v = grid.magnitude_at(std::min(bi * stride_r, rows - 1),
                                               std::min(bj * stride_c, cols - 1));
            int r, g, b;
            color_stops((v - lo) / (hi - lo), r, g, b);
            // row 0 (lowest field) sits at the bottom
            const double x = margin_l + bj * cell_w;
            const double y = height - margin_b - (bi + 1) * cell_h;
            out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
                << fmt(cell_w + 0.5) << "\" height=\"" << fmt(cell_h + 0.5) << "\" fill=\"rgb(" << r
                << "," << g << "," << b << ")\"/>\n";
        }
    }
    out << "</svg>\n";
}

} // namespace magpol::cli
