#pragma once

#include "holespin/series.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holespin {

/// Numeric CSV: one header row, comma delimiter, '.' decimal point.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  std::vector<double> column_values(std::size_t index) const;
};

/// Plain fixed notation for 1e-3 <= |x| < 1e4 (and zero), scientific outside.
std::string format_number(double x);

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& table);

/// Series from columns named x and y (else the first two), optional sigma and
/// power columns. A power column must be constant; `power` overrides it.
DataSeries series_from_csv(const CsvTable& table, std::optional<double> power = std::nullopt);

/// Groups rows by the power column into one series per distinct power,
/// in order of first appearance.
std::vector<DataSeries> spectra_from_csv(const CsvTable& table);

}  // namespace holespin
