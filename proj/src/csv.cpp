#include "elaxp/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "elaxp/errors.hpp"

namespace elaxp::csv {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_optional(std::optional<double> v) {
  if (!v || std::isnan(*v)) return {};
  return format_real(*v);
}

double parse_real(std::string_view cell, std::string_view context) {
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, v);
  if (cell.empty() || res.ec != std::errc{} || res.ptr != last) {
    throw InvalidArgument("cannot parse number '" + std::string(cell) + "' in " +
                          std::string(context));
  }
  return v;
}

std::optional<double> parse_optional(std::string_view cell, std::string_view context) {
  if (cell.empty()) return std::nullopt;
  return parse_real(cell, context);
}

long parse_integer(std::string_view cell, std::string_view context) {
  long v = 0;
  const auto* last = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), last, v);
  if (cell.empty() || res.ec != std::errc{} || res.ptr != last) {
    throw InvalidArgument("cannot parse integer '" + std::string(cell) + "' in " +
                          std::string(context));
  }
  return v;
}

std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      break;
    }
    cells.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\n\r") != std::string::npos) {
      throw InvalidArgument("CSV cell '" + cells[i] + "' contains a separator or line break");
    }
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InvalidArgument("missing CSV column '" + std::string(name) + "'");
}

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty CSV input");
  t.header = split_line(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw InvalidArgument("CSV line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

void write_table(std::ostream& out, const Table& table) {
  out << join(table.header) << '\n';
  for (const auto& row : table.rows) out << join(row) << '\n';
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace elaxp::csv
