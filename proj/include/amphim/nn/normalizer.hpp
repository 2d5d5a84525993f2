#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "amphim/io/binary_io.hpp"

namespace amphim::nn {

/// Per-feature running mean/variance (parallel Welford merge). Columns are samples.
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(Eigen::Index dim, double clip = 10.0, double eps = 1e-8)
      : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)), clip_(clip), eps_(eps) {}

  void update(const Eigen::MatrixXd& batch) {
    if (frozen_ || batch.cols() == 0) return;
    if (batch.rows() != mean_.size()) throw std::invalid_argument("normalizer: dimension mismatch");
    const double n_b = static_cast<double>(batch.cols());
    const Eigen::VectorXd mean_b = batch.rowwise().mean();
    const Eigen::VectorXd m2_b = (batch.colwise() - mean_b).array().square().rowwise().sum();
    const double total = count_ + n_b;
    const Eigen::VectorXd delta = mean_b - mean_;
    mean_ += delta * (n_b / total);
    m2_ += m2_b + delta.cwiseAbs2() * (count_ * n_b / total);
    count_ = total;
  }

  Eigen::VectorXd std() const {
    if (count_ < 2.0) return Eigen::VectorXd::Ones(mean_.size());
    return (m2_ / count_).array().sqrt().max(eps_).matrix();
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    if (x.rows() != mean_.size()) throw std::invalid_argument("normalizer: dimension mismatch");
    const Eigen::ArrayXd inv = std().array().inverse();
    Eigen::MatrixXd out = ((x.colwise() - mean_).array().colwise() * inv).matrix();
    if (clip_ > 0.0) out = out.cwiseMax(-clip_).cwiseMin(clip_);
    return out;
  }

  /// d(apply)/dx ignoring clipping, per feature.
  Eigen::VectorXd scale() const { return std().cwiseInverse(); }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  double count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::Index dim() const { return mean_.size(); }

  void save(io::BinaryWriter& w) const {
    w.magic("NORM");
    w.vec(mean_);
    w.vec(m2_);
    w.f64(count_);
    w.f64(clip_);
    w.f64(eps_);
    w.boolean(frozen_);
  }
  void load(io::BinaryReader& r) {
    r.expect_magic("NORM");
    const Eigen::VectorXd mean = r.vec();
    const Eigen::VectorXd m2 = r.vec();
    if (mean.size() != mean_.size() && mean_.size() != 0) throw io::FormatError("normalizer: dimension mismatch");
    mean_ = mean;
    m2_ = m2;
    count_ = r.f64();
    clip_ = r.f64();
    eps_ = r.f64();
    frozen_ = r.boolean();
  }

 private:
  Eigen::VectorXd mean_, m2_;
  double count_ = 0.0;
  double clip_ = 10.0;
  double eps_ = 1e-8;
  bool frozen_ = false;
};

}  // namespace amphim::nn
