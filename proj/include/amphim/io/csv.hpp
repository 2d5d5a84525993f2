#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace amphim::io {

/// Formats with 17 significant digits so doubles round-trip exactly.
std::string format_double(double v);

std::vector<std::string> split(std::string_view line, char sep);
std::string trim(std::string_view s);

/// Parses a double, throwing std::invalid_argument naming `what` on failure.
double parse_double(std::string_view s, const std::string& what);
long long parse_int(std::string_view s, const std::string& what);

/// Numeric table: header row plus numeric rows. Lines starting with '#' are
/// comments and are kept separately.
struct NumericTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of `name`, or throws std::out_of_range naming the column.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

NumericTable read_numeric_csv(const std::string& path);

}  // namespace amphim::io
