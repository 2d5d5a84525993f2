#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace amphim::cli {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using MetricsRow = std::vector<std::pair<std::string, double>>;

inline constexpr const char* kMetricsSchema = "metrics/1";

/// Append-only numeric CSV: a schema comment, one header line, then one
/// flushed row per write. Every row must repeat the header's keys in order.
class MetricsWriter {
 public:
  /// With `append`, an existing file must carry the same schema and header.
  MetricsWriter(std::string path, std::vector<std::string> columns, bool append = false);

  void write(const MetricsRow& row);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::string& path() const { return path_; }
  std::size_t rows_written() const { return rows_; }

 private:
  std::string path_;
  std::vector<std::string> columns_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

std::string header_line(const std::vector<std::string>& columns);

}  // namespace amphim::cli
