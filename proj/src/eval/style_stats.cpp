#include "amphim/eval/style_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace amphim::eval {

StyleHistogram histogram(const std::vector<double>& values, int bins, double lo, double hi) {
  if (values.empty()) throw std::invalid_argument("style histogram: empty window");
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("style histogram: invalid binning");
  StyleHistogram h;
  h.lo = lo;
  h.hi = hi;
  h.bins.assign(static_cast<std::size_t>(bins), 0);
  h.samples = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("style histogram: non-finite value");
    sum += v;
    const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    ++h.bins[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))];
  }
  h.mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - h.mean) * (v - h.mean);
  h.std = std::sqrt(var / static_cast<double>(values.size()));
  return h;
}

StyleHistogram style_histogram(const io::NumericTable& metrics, int first, int last, const std::string& column) {
  const std::size_t it = metrics.column("iteration");
  const std::size_t col = metrics.column(column);
  std::vector<double> values;
  for (const auto& row : metrics.rows) {
    if (row[it] >= first && row[it] <= last) values.push_back(row[col]);
  }
  if (values.empty()) {
    throw std::invalid_argument("style histogram: no rows in iteration window [" + std::to_string(first) + ", " +
                                std::to_string(last) + "]");
  }
  StyleHistogram h = histogram(values);
  h.first_iteration = first;
  h.last_iteration = last;
  return h;
}

void write_style_csv(const StyleHistogram& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "# first_iteration=" << h.first_iteration << " last_iteration=" << h.last_iteration
      << " samples=" << h.samples << " mean=" << io::format_double(h.mean) << " std=" << io::format_double(h.std)
      << '\n';
  out << "bin,lo,hi,count\n";
  const double w = (h.hi - h.lo) / static_cast<double>(h.bins.size());
  for (std::size_t i = 0; i < h.bins.size(); ++i) {
    out << i << ',' << io::format_double(h.lo + w * static_cast<double>(i)) << ','
        << io::format_double(h.lo + w * static_cast<double>(i + 1)) << ',' << h.bins[i] << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace amphim::eval
