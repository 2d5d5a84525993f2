#pragma once

#include <string>
#include <vector>

#include "amphim/io/csv.hpp"

namespace amphim::eval {

struct StyleHistogram {
  double mean = 0.0;
  double std = 0.0;  // population
  double lo = 0.0, hi = 1.0;
  std::vector<int> bins;
  int samples = 0;
  int first_iteration = 0, last_iteration = 0;
};

/// Fixed-width histogram over [lo, hi]; values outside are clamped into the edge bins.
/// Throws std::invalid_argument on an empty sample.
StyleHistogram histogram(const std::vector<double>& values, int bins = 50, double lo = 0.0, double hi = 1.0);

/// Style reward statistics over iterations [first, last] of a metrics table.
/// Throws std::out_of_range naming a missing column and std::invalid_argument on an empty window.
StyleHistogram style_histogram(const io::NumericTable& metrics, int first, int last,
                               const std::string& column = "style_reward_mean");

void write_style_csv(const StyleHistogram& h, const std::string& path);

}  // namespace amphim::eval
