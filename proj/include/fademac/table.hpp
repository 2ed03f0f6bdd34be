#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace fademac {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Rectangular result table; column order is the CSV schema order.
struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    /// Throws std::invalid_argument if the row width does not match the header.
    void add_row(std::vector<Cell> row);

    /// Index of a column by name; throws std::out_of_range if absent.
    std::size_t column(const std::string& name) const;

    double number(std::size_t row, const std::string& name) const;
};

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

void write_csv(const Table& table, std::ostream& out);
std::string to_csv_string(const Table& table);

/// Writes UTF-8 CSV with '\n' line endings. I/O failures throw
/// std::runtime_error mentioning the path.
void emit_csv(const Table& table, const std::filesystem::path& path);

/// Minimal reader for files produced by emit_csv (all cells as strings).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

} // namespace fademac
