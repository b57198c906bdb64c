#include "holespin/csv.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace holespin {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

std::vector<double> CsvTable::column_values(std::size_t index) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(index));
  return out;
}

std::string format_number(double x) {
  const double a = std::abs(x);
  if (x == 0.0 || (a >= 1e-3 && a < 1e4)) return fmt::format("{:.12g}", x);
  return fmt::format("{:.12e}", x);
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line);
    if (table.header.empty()) {
      for (auto c : cells) table.header.emplace_back(c);
      continue;
    }
    if (cells.size() != table.header.size())
      throw ValidationError(fmt::format("csv line {}: expected {} fields, got {}", line_no, table.header.size(),
                                        cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc{} || ptr != c.data() + c.size())
        throw ValidationError(fmt::format("csv line {}: '{}' is not a number", line_no, c));
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ValidationError("csv: no header row");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open csv file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

namespace {

struct Columns {
  std::size_t x, y;
  std::optional<std::size_t> sigma, power;
};

Columns locate(const CsvTable& t) {
  if (t.header.size() < 2) throw ValidationError("csv: need at least x and y columns");
  Columns c{t.column("x").value_or(0), t.column("y").value_or(1), t.column("sigma"), t.column("power")};
  if (c.x == c.y) throw ValidationError("csv: x and y columns coincide");
  return c;
}

DataSeries build(const CsvTable& t, const Columns& c, const std::vector<std::size_t>& rows) {
  DataSeries s;
  if (c.sigma) s.sigma.emplace();
  for (auto r : rows) {
    s.x.push_back(t.rows[r][c.x]);
    s.y.push_back(t.rows[r][c.y]);
    if (c.sigma) s.sigma->push_back(t.rows[r][*c.sigma]);
  }
  return s;
}

}  // namespace

DataSeries series_from_csv(const CsvTable& table, std::optional<double> power) {
  const Columns c = locate(table);
  std::vector<std::size_t> rows(table.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  DataSeries s = build(table, c, rows);
  if (power) {
    s.power = power;
  } else if (c.power && !table.rows.empty()) {
    const double p0 = table.rows.front()[*c.power];
    for (const auto& r : table.rows)
      if (r[*c.power] != p0) throw ValidationError("csv: power column varies; use spectra_from_csv");
    s.power = p0;
  }
  s.validate();
  return s;
}

std::vector<DataSeries> spectra_from_csv(const CsvTable& table) {
  const Columns c = locate(table);
  if (!c.power) throw ValidationError("csv: spectra need a power column");
  std::vector<double> powers;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double p = table.rows[r][*c.power];
    std::size_t g = 0;
    while (g < powers.size() && powers[g] != p) ++g;
    if (g == powers.size()) {
      powers.push_back(p);
      groups.emplace_back();
    }
    groups[g].push_back(r);
  }
  std::vector<DataSeries> out;
  for (std::size_t g = 0; g < powers.size(); ++g) {
    DataSeries s = build(table, c, groups[g]);
    s.power = powers[g];
    s.label = fmt::format("P={}", powers[g]);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace holespin
