#include "magpol/grid_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace magpol {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& msg) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto a = cell.find_first_not_of(" \t\r");
        const auto b = cell.find_last_not_of(" \t\r");
        cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, const std::filesystem::path& path,
                    std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) parse_fail(path, line, "trailing junk in '" + cell + "'");
        return v;
    } catch (const std::invalid_argument&) {
        parse_fail(path, line, "not a number: '" + cell + "'");
    } catch (const std::out_of_range&) {
        parse_fail(path, line, "out of range: '" + cell + "'");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary); // fixed \n endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

void write_grid_csv(const std::filesystem::path& path, const SpectrumGrid& grid,
                    bool phase_file) {
    std::ofstream out = open_out(path);
    out << "mu0_H_mT";
    for (double f : grid.freq_axis) out << ",f_GHz_" << format_value(f / 1e9);
    out << "\n";
    for (std::size_t i = 0; i < grid.rows(); ++i) {
        out << format_value(grid.field_axis[i] * 1e3);
        for (std::size_t j = 0; j < grid.cols(); ++j) {
            const std::complex<double>& v = grid.at(i, j);
            out << ',' << format_value(phase_file ? std::arg(v) : std::abs(v));
        }
        out << "\n";
    }
}

// values only; axes come from the sidecar (or the header as fallback)
void read_grid_csv(const std::filesystem::path& path, std::vector<double>& header_freqs,
                   std::vector<double>& header_fields, std::vector<double>& flat) {
    std::ifstream in = open_in(path);
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    ++lineno;
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "mu0_H_mT")
        parse_fail(path, 1, "expected header starting with mu0_H_mT");
    header_freqs.clear();
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].rfind("f_GHz_", 0) != 0)
            parse_fail(path, 1, "expected f_GHz_<value> column, got '" + header[j] + "'");
        header_freqs.push_back(parse_double(header[j].substr(6), path, 1) * 1e9);
    }
    if (header_freqs.empty()) parse_fail(path, 1, "no frequency columns");

    header_fields.clear();
    flat.clear();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            parse_fail(path, lineno,
                       "expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()));
        header_fields.push_back(parse_double(cells[0], path, lineno) * 1e-3);
        for (std::size_t j = 1; j < cells.size(); ++j)
            flat.push_back(parse_double(cells[j], path, lineno));
    }
    if (header_fields.empty()) parse_fail(path, lineno, "no data rows");
}

} // namespace

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

GridFiles write_grid(const std::filesystem::path& base, const SpectrumGrid& grid,
                     const nlohmann::json& extra_metadata) {
    grid.validate();
    GridFiles files;

    if (grid.kind == SpectrumGrid::Kind::magnitude) {
        files.csv.push_back(base.string() + ".csv");
        write_grid_csv(files.csv[0], grid, false);
    } else {
        files.csv.push_back(base.string() + "_mag.csv");
        files.csv.push_back(base.string() + "_phase.csv");
        write_grid_csv(files.csv[0], grid, false);
        write_grid_csv(files.csv[1], grid, true);
    }

    nlohmann::json meta = extra_metadata.is_object() ? extra_metadata
                                                     : nlohmann::json::object();
    meta["kind"] =
        grid.kind == SpectrumGrid::Kind::magnitude ? "magnitude" : "complex_s21";
    meta["field_axis_T"] = grid.field_axis;
    meta["freq_axis_Hz"] = grid.freq_axis;
    if (grid.reference_field)
        meta["reference_field_T"] = *grid.reference_field;
    else
        meta["reference_field_T"] = nullptr;

    files.sidecar = base.string() + ".meta.json";
    std::ofstream out = open_out(files.sidecar);
    out << meta.dump(2) << "\n";
    return files;
}

SpectrumGrid read_grid(const std::filesystem::path& base) {
    SpectrumGrid grid;

    const std::filesystem::path sidecar = base.string() + ".meta.json";
    bool have_sidecar = std::filesystem::exists(sidecar);
    std::string kind = "magnitude";
    if (have_sidecar) {
        std::ifstream in = open_in(sidecar);
        nlohmann::json meta;
        try {
            in >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(sidecar.string() + ": " + e.what());
        }
        kind = meta.at("kind").get<std::string>();
        grid.field_axis = meta.at("field_axis_T").get<std::vector<double>>();
        grid.freq_axis = meta.at("freq_axis_Hz").get<std::vector<double>>();
        if (meta.contains("reference_field_T") && !meta["reference_field_T"].is_null())
            grid.reference_field = meta["reference_field_T"].get<double>();
    } else {
        kind = std::filesystem::exists(base.string() + "_mag.csv") ? "complex_s21"
                                                                   : "magnitude";
    }

    std::vector<double> hdr_freqs, hdr_fields, mag_flat;
    if (kind == "magnitude") {
        grid.kind = SpectrumGrid::Kind::magnitude;
        read_grid_csv(base.string() + ".csv", hdr_freqs, hdr_fields, mag_flat);
        if (!have_sidecar) {
            grid.field_axis = hdr_fields;
            grid.freq_axis = hdr_freqs;
        }
        grid.values.resize(mag_flat.size());
        for (std::size_t k = 0; k < mag_flat.size(); ++k) grid.values[k] = mag_flat[k];
    } else if (kind == "complex_s21") {
        grid.kind = SpectrumGrid::Kind::complex_s21;
        std::vector<double> phase_flat, hf2, hh2;
        read_grid_csv(base.string() + "_mag.csv", hdr_freqs, hdr_fields, mag_flat);
        read_grid_csv(base.string() + "_phase.csv", hf2, hh2, phase_flat);
        if (mag_flat.size() != phase_flat.size())
            throw std::runtime_error(base.string() +
                                     ": magnitude/phase files have different shapes");
        if (!have_sidecar) {
            grid.field_axis = hdr_fields;
            grid.freq_axis = hdr_freqs;
        }
        grid.values.resize(mag_flat.size());
        for (std::size_t k = 0; k < mag_flat.size(); ++k)
            grid.values[k] = std::polar(mag_flat[k], phase_flat[k]);
    } else {
        throw std::runtime_error(sidecar.string() + ": unknown grid kind '" + kind + "'");
    }

    if (grid.values.size() != grid.field_axis.size() * grid.freq_axis.size())
        throw std::runtime_error(base.string() + ": CSV shape does not match axes");
    grid.validate();
    return grid;
}

void write_points_csv(const std::filesystem::path& path, const std::vector<PointRow>& rows) {
    std::ofstream out = open_out(path);
    out << "mu0_H_mT,f_GHz,branch,hwhm_MHz\n";
    for (const PointRow& r : rows) {
        out << format_value(r.mu0_H * 1e3) << ',' << format_value(r.f / 1e9) << ','
            << r.branch << ',' << (r.hwhm ? format_value(*r.hwhm / 1e6) : "") << "\n";
    }
}

std::vector<PointRow> read_points_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    ++lineno;
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "mu0_H_mT" || header[1] != "f_GHz" ||
        header[2] != "branch")
        parse_fail(path, 1, "expected header mu0_H_mT,f_GHz,branch[,hwhm_MHz]");
    const bool has_width = header.size() == 4 && header[3] == "hwhm_MHz";
    if (header.size() > 4 || (header.size() == 4 && !has_width))
        parse_fail(path, 1, "unexpected extra columns");

    std::vector<PointRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            parse_fail(path, lineno, "wrong number of cells");
        PointRow r;
        r.mu0_H = parse_double(cells[0], path, lineno) * 1e-3;
        r.f = parse_double(cells[1], path, lineno) * 1e9;
        r.branch = cells[2];
        if (r.branch != "lower" && r.branch != "upper" && r.branch != "auto")
            parse_fail(path, lineno, "branch must be lower|upper|auto");
        if (has_width && !cells[3].empty())
            r.hwhm = parse_double(cells[3], path, lineno) * 1e6;
        rows.push_back(r);
    }
    return rows;
}

} // namespace magpol
