#include "amphim/eval/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace amphim::eval {

WindowStats windowed_stats(const io::NumericTable& metrics, const std::string& column, int window) {
  if (window < 1) throw std::invalid_argument("ablation: window must be >= 1");
  const std::size_t col = metrics.column(column);
  if (metrics.rows.empty()) throw std::invalid_argument("ablation: metrics table has no rows");
  WindowStats s;
  const std::size_t n = metrics.rows.size();
  s.clamped = static_cast<std::size_t>(window) > n;
  const std::size_t first = s.clamped ? 0 : n - static_cast<std::size_t>(window);
  s.rows = static_cast<int>(n - first);
  double sum = 0.0;
  for (std::size_t i = first; i < n; ++i) sum += metrics.rows[i][col];
  s.mean = sum / s.rows;
  double var = 0.0;
  for (std::size_t i = first; i < n; ++i) var += (metrics.rows[i][col] - s.mean) * (metrics.rows[i][col] - s.mean);
  s.std = std::sqrt(var / s.rows);
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

bool AblationTable::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const OrderingCheck& c) { return c.evaluated && c.pass; });
}

std::vector<std::pair<std::string, std::string>> default_ordering(const std::vector<std::string>& arms) {
  const auto has = [&](const std::string& a) { return std::find(arms.begin(), arms.end(), a) != arms.end(); };
  std::vector<std::pair<std::string, std::string>> out;
  if (!has("amp")) return out;
  for (const char* a : {"ampw_him_plus", "amp_him"}) {
    if (has(a)) out.emplace_back(a, "amp");
  }
  return out;
}

AblationTable summarize_ablation(std::vector<AblationCell> cells, int expected_iterations, const std::string& column,
                                 int window, const std::vector<std::pair<std::string, std::string>>& ordering) {
  AblationTable t;
  t.column = column;
  t.window = window;
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> means, pooled;
  std::map<std::string, int> seeds, complete;
  for (auto& c : cells) {
    if (std::find(order.begin(), order.end(), c.arm) == order.end()) order.push_back(c.arm);
    ++seeds[c.arm];
    const std::string path = (std::filesystem::path(c.run_dir) / "metrics.csv").string();
    try {
      const io::NumericTable m = io::read_numeric_csv(path);
      c.stats = windowed_stats(m, column, window);
      if (c.stats.clamped) {
        t.warnings.push_back(c.arm + " seed " + std::to_string(c.seed) + ": window of " + std::to_string(window) +
                             " clamped to " + std::to_string(c.stats.rows) + " rows");
      }
      if (static_cast<int>(m.rows.size()) < expected_iterations) {
        c.note = "incomplete: " + std::to_string(m.rows.size()) + "/" + std::to_string(expected_iterations) +
                 " iterations";
      } else {
        c.complete = true;
        means[c.arm].push_back(c.stats.mean);
        const std::size_t col = m.column(column);
        for (std::size_t i = m.rows.size() - static_cast<std::size_t>(c.stats.rows); i < m.rows.size(); ++i) {
          pooled[c.arm].push_back(m.rows[i][col]);
        }
        ++complete[c.arm];
      }
    } catch (const std::exception& e) {
      c.note = e.what();
    }
  }
  t.cells = std::move(cells);
  for (const auto& arm : order) {
    ArmSummary s;
    s.arm = arm;
    s.seeds = seeds[arm];
    s.complete = complete[arm];
    if (s.complete > 0) {
      const auto& m = means[arm];
      double sum = 0.0;
      for (double x : m) sum += x;
      s.mean = sum / static_cast<double>(m.size());
      s.median = median(m);
      const auto& p = pooled[arm];
      double ps = 0.0, var = 0.0;
      for (double x : p) ps += x;
      const double pm = ps / static_cast<double>(p.size());
      for (double x : p) var += (x - pm) * (x - pm);
      s.std = std::sqrt(var / static_cast<double>(p.size()));
    } else {
      s.mean = s.median = s.std = std::nan("");
    }
    t.arms.push_back(s);
  }
  const auto find = [&](const std::string& a) -> const ArmSummary* {
    for (const auto& s : t.arms) {
      if (s.arm == a) return &s;
    }
    return nullptr;
  };
  for (const auto& [better, worse] : ordering) {
    OrderingCheck c{better, worse};
    const ArmSummary *b = find(better), *w = find(worse);
    // Ordering is judged only when every seed of both arms completed.
    c.evaluated = b && w && b->complete == b->seeds && w->complete == w->seeds && b->complete > 0 && w->complete > 0;
    c.pass = c.evaluated && b->median >= w->median;
    t.checks.push_back(c);
  }
  return t;
}

void write_ablation_csv(const AblationTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "# column=" << t.column << " window=" << t.window << '\n';
  for (const auto& c : t.checks) {
    out << "# ordering " << c.better << " >= " << c.worse << ": "
        << (c.evaluated ? (c.pass ? "PASS" : "FAIL") : "NOT_EVALUATED") << '\n';
  }
  out << "arm,seeds,complete,mean_return,median_return,std_return\n";
  for (const auto& s : t.arms) {
    out << s.arm << ',' << s.seeds << ',' << s.complete << ',' << io::format_double(s.mean) << ','
        << io::format_double(s.median) << ',' << io::format_double(s.std) << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_ablation_cells_csv(const AblationTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "arm,seed,complete,window_rows,mean_return,std_return,run_dir,note\n";
  for (const auto& c : t.cells) {
    std::string note = c.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out << c.arm << ',' << c.seed << ',' << (c.complete ? 1 : 0) << ',' << c.stats.rows << ','
        << io::format_double(c.stats.mean) << ',' << io::format_double(c.stats.std) << ',' << c.run_dir << ','
        << note << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace amphim::eval
