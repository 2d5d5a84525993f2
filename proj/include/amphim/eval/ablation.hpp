#pragma once

#include <string>
#include <utility>
#include <vector>

#include "amphim/io/csv.hpp"

namespace amphim::eval {

struct WindowStats {
  double mean = 0.0;
  double std = 0.0;  // population, over the window's rows
  int rows = 0;
  bool clamped = false;  // window longer than the run
};

/// Statistics of `column` over the last `window` rows. Throws on a missing column
/// or an empty table.
WindowStats windowed_stats(const io::NumericTable& metrics, const std::string& column, int window);

struct AblationCell {
  std::string arm;
  int seed = 0;
  std::string run_dir;
  bool complete = false;
  std::string note;  // why the cell is incomplete
  WindowStats stats;
};

struct ArmSummary {
  std::string arm;
  int seeds = 0;
  int complete = 0;
  double mean = 0.0;    // mean of per-seed windowed means
  double median = 0.0;  // median of per-seed windowed means
  double std = 0.0;     // std of the pooled window rows across seeds
};

struct OrderingCheck {
  std::string better, worse;
  bool evaluated = false;
  bool pass = false;
};

struct AblationTable {
  std::string column;
  int window = 0;
  std::vector<AblationCell> cells;
  std::vector<ArmSummary> arms;
  std::vector<OrderingCheck> checks;
  std::vector<std::string> warnings;
  bool all_pass() const;
};

/// Reads each cell's metrics.csv and summarises per arm. Cells whose file is
/// missing or shorter than `expected_iterations` are flagged, not dropped from the table.
AblationTable summarize_ablation(std::vector<AblationCell> cells, int expected_iterations,
                                 const std::string& column = "task_reward_mean", int window = 500,
                                 const std::vector<std::pair<std::string, std::string>>& ordering = {});

/// Default orderings among the arms present: each of amp_him and ampw_him_plus >= amp.
std::vector<std::pair<std::string, std::string>> default_ordering(const std::vector<std::string>& arms);

double median(std::vector<double> v);

void write_ablation_csv(const AblationTable& t, const std::string& path);
void write_ablation_cells_csv(const AblationTable& t, const std::string& path);

}  // namespace amphim::eval
