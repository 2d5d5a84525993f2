#pragma once

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <vector>

#include "amphim/io/binary_io.hpp"
#include "amphim/nn/adam.hpp"
#include "amphim/nn/mlp.hpp"
#include "amphim/train/config.hpp"

namespace amphim::train {

using nn::Matrix;
using nn::Mlp;
using nn::Vector;

/// Diagonal-Gaussian actor with a state-independent log std, plus a value critic.
class ActorCritic {
 public:
  ActorCritic() = default;
  ActorCritic(int policy_in, int critic_in, int action_dim, const PpoConfig& cfg, std::mt19937_64& rng);

  Matrix mean(const Matrix& x) const { return actor_.forward(x); }
  Vector value(const Matrix& x) const { return critic_.forward(x).row(0).transpose(); }

  /// Flat parameters: actor, log std, critic.
  Vector flat() const;
  void set_flat(const Vector& p);
  Eigen::Index size() const { return actor_.params().size() + log_std_.size() + critic_.params().size(); }

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  Vector& log_std() { return log_std_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Vector& log_std() const { return log_std_; }

  void save(io::BinaryWriter& w) const;
  void load(io::BinaryReader& r);

 private:
  Mlp actor_, critic_;
  Vector log_std_;
};

/// log N(a; mean, diag(exp(log_std))^2), one value per column.
Vector gaussian_log_prob(const Matrix& mean, const Vector& log_std, const Matrix& actions);

struct SurrogateStats {
  double approx_kl = 0.0;  // mean((r - 1) - log r)
  double clip_fraction = 0.0;
};

/// Clipped surrogate, negated for minimisation, averaged over columns. Gradients
/// are with respect to the Gaussian mean and log std.
double surrogate_loss(const Matrix& mean, const Vector& log_std, const Matrix& actions, const Vector& old_log_prob,
                      const Vector& advantages, double clip_eps, Matrix* grad_mean = nullptr,
                      Vector* grad_log_std = nullptr, SurrogateStats* stats = nullptr);

/// d(loss)/d(ratio) for one sample of the surrogate above (before averaging).
double surrogate_ratio_grad(double ratio, double advantage, double clip_eps);

/// mean((v - target)^2).
double value_loss(const Vector& values, const Vector& targets, Vector* grad = nullptr);

/// Differential entropy of the diagonal Gaussian (per sample).
double gaussian_entropy(const Vector& log_std, Vector* grad = nullptr);

struct Advantages {
  Vector advantages;
  Vector returns;
};

/// GAE over a time-major batch (index t * num_envs + e). `dones[i]` cuts the
/// bootstrap after step i; `last_values` bootstraps the final step.
Advantages compute_gae(const Vector& rewards, const Vector& values, const std::vector<char>& dones,
                       const Vector& last_values, int num_envs, double gamma, double lambda);

/// Zero mean, unit std (population); a constant vector maps to zeros.
Vector normalize_advantages(const Vector& a);

struct PpoBatch {
  Matrix policy_in;
  Matrix critic_in;
  Matrix actions;
  Vector old_log_prob;
  Vector advantages;
  Vector returns;
};

struct PpoStats {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  int skipped = 0;  // minibatches rejected for non-finite loss or gradient
};

struct PpoLoss {
  double total = 0.0;
  double surrogate = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  SurrogateStats stats;
};

/// Full objective on one minibatch; `grad` receives d/d(flat params).
PpoLoss ppo_loss(const ActorCritic& ac, const PpoBatch& batch, const std::vector<Eigen::Index>& cols,
                 const PpoConfig& cfg, Vector* grad);

/// Epochs x minibatches of clipped-surrogate updates. `on_minibatch` runs after
/// each policy step with the minibatch column indices.
PpoStats ppo_update(ActorCritic& ac, nn::Adam& opt, const PpoBatch& batch, const PpoConfig& cfg,
                    std::mt19937_64& rng,
                    const std::function<void(const std::vector<Eigen::Index>&)>& on_minibatch = {});

}  // namespace amphim::train
