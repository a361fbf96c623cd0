#include "pllt/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace pllt {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path), n_cols_(columns.size()), path_(path) {
    if (!out_) throw PlltError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns[i];
    }
    out_ << '\n';
}

void CsvWriter::write_row(const std::vector<double>& values) {
    if (values.size() != n_cols_)
        throw PlltError("column count mismatch writing " + path_);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_full(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::write_cells(const std::vector<std::string>& cells) {
    if (cells.size() != n_cols_)
        throw PlltError("column count mismatch writing " + path_);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

CsvTable CsvTable::read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PlltError("cannot open for reading: " + path);

    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!ss && line.back() == ',') cells.emplace_back();
        if (first) {
            table.columns_ = std::move(cells);
            first = false;
        } else {
            table.rows_.push_back(std::move(cells));
        }
    }
    return table;
}

bool CsvTable::has_column(const std::string& name) const { return column_index(name) >= 0; }

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == name) return static_cast<int>(i);
    return -1;
}

const std::string& CsvTable::cell(std::size_t row, int col) const {
    return rows_.at(row).at(static_cast<std::size_t>(col));
}

double CsvTable::value(std::size_t row, int col) const {
    return std::strtod(cell(row, col).c_str(), nullptr);
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
    const int col = column_index(name);
    if (col < 0) throw PlltError("missing CSV column: " + name);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) out.push_back(value(r, col));
    return out;
}

}  // namespace pllt
