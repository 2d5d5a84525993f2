#pragma once

#include <cstdint>

#include "amphim/eval/policy_agent.hpp"

namespace amphim::eval {

struct HimProbeOptions {
  int episodes_per_class = 20;
  double episode_s = 4.0;
  double warmup_s = 1.0;  // steps skipped after each reset
  double walk_max = 0.4;  // walk commands uniform in [-walk_max, walk_max]
  double run_lo = 0.8, run_hi = 1.0;
  std::uint64_t seed = 7;
};

struct HimProbeReport {
  int samples = 0;
  double velocity_mae = 0.0;       // |v_hat - v| over the planar components (x, z)
  double zero_mae = 0.0;           // same for the constant-zero predictor
  double probe_train_accuracy = 0.0;
  double probe_test_accuracy = 0.0;  // held-out episodes
};

/// Rolls out the policy under held walk and run commands, scores the estimator's
/// velocity on those held-out states and fits a logistic probe on z.
/// Throws std::invalid_argument when the policy has no estimator.
HimProbeReport him_probe(const LoadedPolicy& p, const HimProbeOptions& opts = {});

/// Binary logistic regression by full-batch gradient descent; returns [w; b].
Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int iterations = 2000,
                             double lr = 0.5, double l2 = 1e-4);
double logistic_accuracy(const Eigen::VectorXd& wb, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace amphim::eval
