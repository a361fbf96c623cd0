#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "pllt/errors.hpp"

namespace pllt {

/// Formats a double with 17 significant digits (lossless round trip).
[[nodiscard]] std::string format_full(double v);

/// Minimal CSV emitter: header row plus numeric/string cells, full precision.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);

    void write_row(const std::vector<double>& values);
    /// Mixed row: values formatted full-precision, strings verbatim.
    void write_cells(const std::vector<std::string>& cells);
    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    std::size_t n_cols_;
    std::string path_;
};

/// In-memory CSV table with string cells and numeric accessors.
class CsvTable {
public:
    static CsvTable read(const std::string& path);

    [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
    [[nodiscard]] std::size_t row_count() const { return rows_.size(); }
    [[nodiscard]] bool has_column(const std::string& name) const;
    [[nodiscard]] int column_index(const std::string& name) const;  // -1 when absent
    [[nodiscard]] const std::string& cell(std::size_t row, int col) const;
    [[nodiscard]] double value(std::size_t row, int col) const;
    /// Whole column as doubles.
    [[nodiscard]] std::vector<double> numeric_column(const std::string& name) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace pllt
