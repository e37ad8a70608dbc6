#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace elaxp::csv {

// 17 significant digits, which always round-trips a double.
std::string format_real(double v);
// Empty string for missing (nullopt or NaN).
std::string format_optional(std::optional<double> v);

double parse_real(std::string_view cell, std::string_view context);
std::optional<double> parse_optional(std::string_view cell, std::string_view context);
long parse_integer(std::string_view cell, std::string_view context);

std::vector<std::string> split_line(std::string_view line);
// Cells are not quoted; a cell containing a comma or line break is rejected.
std::string join(const std::vector<std::string>& cells);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws InvalidArgument when absent.
  std::size_t column(std::string_view name) const;
};

// Reads a header + rows table. Rows must match the header width.
Table read_table(std::istream& in);
void write_table(std::ostream& out, const Table& table);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace elaxp::csv
