#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace amphim::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index size, AdamConfig cfg) : cfg_(cfg), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

  /// Returns false (and leaves everything untouched) when the gradient is not finite.
  bool step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (!grad.allFinite()) {
      ++rejected_;
      return false;
    }
    ++step_count_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    params.array() -= cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
    return true;
  }

  AdamConfig& config() { return cfg_; }
  const AdamConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return step_count_; }
  std::int64_t rejected() const { return rejected_; }
  Eigen::VectorXd& first_moment() { return m_; }
  Eigen::VectorXd& second_moment() { return v_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  void set_step_count(std::int64_t n) { step_count_ = n; }

 private:
  AdamConfig cfg_;
  Eigen::VectorXd m_, v_;
  std::int64_t step_count_ = 0;
  std::int64_t rejected_ = 0;
};

/// Rescales `grad` in place so its norm is at most `max_norm`; returns the original norm.
inline double clip_grad_norm(Eigen::VectorXd& grad, double max_norm) {
  const double n = grad.norm();
  if (std::isfinite(n) && n > max_norm && n > 0.0) grad *= max_norm / n;
  return n;
}

}  // namespace amphim::nn
