#include "funrec/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"

namespace funrec {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& cell, std::size_t line_no) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && cell.front() == '+') ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw IoError("CSV: cannot parse number '" + cell + "' on line " +
                      std::to_string(line_no));
    if (!std::isfinite(v))
        throw IoError("CSV: non-finite value on line " + std::to_string(line_no));
    return v;
}

struct RawTable {
    std::vector<double> header;  // grid abscissae
    bool has_response = false;
    std::vector<std::vector<double>> rows;  // grid values (+ response last when present)
};

RawTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    RawTable table;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw IoError("CSV: empty file " + path.string());
    ++line_no;
    auto cells = split_csv_line(line);
    if (cells.empty()) throw IoError("CSV: empty header in " + path.string());
    table.has_response = cells.back() == "y";
    const std::size_t grid_cols = table.has_response ? cells.size() - 1 : cells.size();
    if (grid_cols < 2) throw IoError("CSV: header must carry at least two grid abscissae");
    for (std::size_t k = 0; k < grid_cols; ++k)
        table.header.push_back(parse_double(cells[k], line_no));

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        cells = split_csv_line(line);
        if (cells.size() != grid_cols + (table.has_response ? 1 : 0))
            throw IoError("CSV: wrong column count on line " + std::to_string(line_no));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c, line_no));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace

void write_dataset_csv(const std::filesystem::path& path, std::span<const LabeledCurve> data) {
    if (data.empty()) throw ValidationError("write_dataset_csv: empty dataset");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    const auto& grid = *data.front().first.grid();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out << format_double(grid.points()[k]) << ',';
    }
    out << "y\n";
    for (const auto& [x, y] : data) {
        for (std::size_t k = 0; k < x.size(); ++k) out << format_double(x[k]) << ',';
        out << format_double(y) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    RawTable table = read_table(path);
    if (!table.has_response)
        throw IoError("CSV: " + path.string() + " has no response column 'y'");
    Dataset d;
    d.grid = Grid::make(table.header);
    d.observations.reserve(table.rows.size());
    for (auto& row : table.rows) {
        const double y = row.back();
        row.pop_back();
        d.observations.emplace_back(Curve(d.grid, std::move(row)), y);
    }
    return d;
}

PointSet read_points_csv(const std::filesystem::path& path) {
    RawTable table = read_table(path);
    PointSet p;
    p.grid = Grid::make(table.header);
    p.points.reserve(table.rows.size());
    for (auto& row : table.rows) {
        if (table.has_response) row.pop_back();
        p.points.emplace_back(Curve(p.grid, std::move(row)));
    }
    if (p.points.empty()) throw IoError("CSV: " + path.string() + " holds no points");
    return p;
}

}  // namespace funrec
