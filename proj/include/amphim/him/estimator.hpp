#pragma once

#include <random>

#include "amphim/nn/adam.hpp"
#include "amphim/nn/mlp.hpp"
#include "amphim/sim/observation.hpp"

namespace amphim::him {

using nn::Matrix;
using nn::Mlp;
using nn::Vector;

struct HimConfig {
  int history = 6;
  int obs_dim = 20;
  int latent_dim = 16;
  double temperature = 0.1;
  std::vector<int> hidden{128, 128};
  double velocity_weight = 1.0;
  double contrastive_weight = 1.0;
  double lr = 1e-3;
  double grad_clip = 1.0;

  int input_dim() const { return history * obs_dim; }
  void validate() const;
};

struct HimOutput {
  Eigen::Vector3d v_hat = Eigen::Vector3d::Zero();
  Vector z;  // unit norm
};

struct HimBatch {
  Matrix v_hat;  // 3 x B
  Matrix z;      // latent x B, unit columns
};

/// Unit-normalizes each column. Columns with norm below 1e-12 map to the
/// fixed fallback axis e_0. `norms` receives the pre-normalization norms.
Matrix normalize_columns(const Matrix& raw, Vector* norms = nullptr);
/// Backward through normalize_columns: d/d(raw) given d/d(z).
Matrix normalize_columns_backward(const Matrix& z, const Vector& norms, const Matrix& grad_z);

/// Mean squared error over every component of the batch; fills dL/dv_hat.
double velocity_loss(const Matrix& v_hat, const Matrix& v_true, Matrix* grad = nullptr);

/// InfoNCE over cosine similarities of unit columns: row i's positive is
/// target i, the other targets are negatives. Targets are constants.
/// Throws std::invalid_argument for batches smaller than 2.
double contrastive_loss(const Matrix& z, const Matrix& targets, double temperature, Matrix* grad_z = nullptr);

struct HimStats {
  double velocity_loss = 0.0;
  double contrastive_loss = 0.0;
  double velocity_mae = 0.0;
};

/// Shared trunk over the flattened history, a head producing [v_hat, z_raw],
/// and a frozen projection head giving stop-gradient targets for o_{t+1}.
class HimEstimator {
 public:
  HimEstimator() = default;
  HimEstimator(HimConfig cfg, std::mt19937_64& rng);

  HimOutput encode(const Vector& flat_history) const;
  HimOutput encode(const sim::ObservationHistory& history) const;
  HimBatch encode_batch(const Matrix& histories) const;
  /// Unit target embeddings of the next-step histories (no gradient).
  Matrix targets(const Matrix& next_histories) const;

  /// Weighted velocity + contrastive loss; accumulates d/d(trunk ++ head) params into `grad`.
  HimStats loss(const Matrix& histories, const Matrix& next_histories, const Matrix& v_true, Vector* grad) const;
  HimStats update(const Matrix& histories, const Matrix& next_histories, const Matrix& v_true);

  /// Flat view over trainable params (trunk then head), for optimizers and checks.
  Vector trainable() const;
  void set_trainable(const Vector& p);

  const HimConfig& config() const { return cfg_; }
  Mlp& trunk() { return trunk_; }
  Mlp& head() { return head_; }
  Mlp& projection() { return proj_; }
  const Mlp& trunk() const { return trunk_; }
  const Mlp& head() const { return head_; }
  const Mlp& projection() const { return proj_; }
  nn::Adam& optimizer() { return opt_; }
  const nn::Adam& optimizer() const { return opt_; }

 private:
  void check_input(const Matrix& x, const char* what) const;

  HimConfig cfg_;
  Mlp trunk_, head_, proj_;
  nn::Adam opt_;
};

}  // namespace amphim::him
