#include "amphim/cli/metrics.hpp"

#include <filesystem>

#include "amphim/io/csv.hpp"

namespace amphim::cli {

std::string header_line(const std::vector<std::string>& columns) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  return out;
}

MetricsWriter::MetricsWriter(std::string path, std::vector<std::string> columns, bool append)
    : path_(std::move(path)), columns_(std::move(columns)) {
  if (columns_.empty()) throw SchemaError(path_ + ": metrics schema has no columns");
  const bool existing = append && std::filesystem::exists(path_);
  if (existing) {
    std::ifstream in(path_);
    std::string schema, header;
    std::getline(in, schema);
    std::getline(in, header);
    if (schema != std::string("# schema: ") + kMetricsSchema || header != header_line(columns_)) {
      throw SchemaError(path_ + ": existing metrics file has a different schema");
    }
    out_.open(path_, std::ios::app);
  } else {
    out_.open(path_, std::ios::trunc);
  }
  if (!out_) throw std::runtime_error(path_ + ": cannot open metrics file for writing");
  if (!existing) {
    out_ << "# schema: " << kMetricsSchema << '\n' << header_line(columns_) << '\n';
    out_.flush();
  }
}

void MetricsWriter::write(const MetricsRow& row) {
  if (row.size() != columns_.size()) {
    throw SchemaError(path_ + ": schema drift (row has " + std::to_string(row.size()) + " values, header has " +
                      std::to_string(columns_.size()) + ")");
  }
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i].first != columns_[i]) {
      throw SchemaError(path_ + ": schema drift at column " + std::to_string(i) + " ('" + row[i].first +
                        "' where header has '" + columns_[i] + "')");
    }
    line += (i ? "," : "") + io::format_double(row[i].second);
  }
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error(path_ + ": metrics write failed");
  ++rows_;
}

}  // namespace amphim::cli
