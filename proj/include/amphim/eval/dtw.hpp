#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace amphim::eval {

struct DtwResult {
  double distance = 0.0;
  std::vector<std::pair<int, int>> path;  // (i, j), from (0, 0) to (n - 1, m - 1)
};

/// Dynamic time warping between frame sequences stored as columns, with
/// Euclidean local cost and steps (1,0), (0,1), (1,1). Distance is the total
/// accumulated cost. Throws std::invalid_argument on empty input or a
/// per-frame dimension mismatch.
DtwResult dtw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct DtwRecord {
  std::string label;
  double nominal_speed = 0.0;
  int episode = 0;
  double distance = 0.0;
  int frames = 0;
};

void write_dtw_csv(const std::vector<DtwRecord>& records, const std::string& path);

}  // namespace amphim::eval
