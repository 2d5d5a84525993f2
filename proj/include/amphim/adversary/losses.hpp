#pragma once

#include <random>
#include <string>

#include "amphim/motion/dataset.hpp"
#include "amphim/nn/adam.hpp"
#include "amphim/nn/mlp.hpp"

namespace amphim::adversary {

using nn::Matrix;
using nn::Mlp;
using nn::Vector;

enum class Criterion { lsgan, wgan_div };
enum class RewardMap { lsgan_quadratic, bounded_sigmoid };
enum class PenaltyMode { analytic, finite_difference };

const char* to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);
const char* to_string(RewardMap m);
RewardMap reward_map_from_string(const std::string& s);

struct AdversaryConfig {
  Criterion criterion = Criterion::lsgan;
  double wgan_k = 2.0;
  double wgan_p = 6.0;
  double style_weight = 1.0;
  RewardMap reward_map = RewardMap::lsgan_quadratic;
  PenaltyMode penalty_mode = PenaltyMode::analytic;
  int updates_per_iteration = 2;
  double grad_clip = 10.0;
  double lr = 1e-4;

  /// Reward map paired with a criterion: quadratic for lsgan, sigmoid for wgan_div.
  static RewardMap default_map(Criterion c) {
    return c == Criterion::lsgan ? RewardMap::lsgan_quadratic : RewardMap::bounded_sigmoid;
  }
  void validate() const;
};

struct LossResult {
  double loss = 0.0;
  double penalty = 0.0;  // wgan_div gradient-norm term (already multiplied by k)
  double real_mean = 0.0;
  double fake_mean = 0.0;
  Vector grad;  // d loss / d params
};

/// Scores a batch (one sample per column).
Vector critic_scores(const Mlp& d, const Matrix& x);
double critic_score(const Mlp& d, const motion::TransitionPair& pair);

/// E_real[(D - 1)^2] + E_fake[(D + 1)^2].
LossResult lsgan_loss(const Mlp& d, const Matrix& real, const Matrix& fake);

/// E_fake[D] - E_real[D] + k * E_xhat[||grad_x D(xhat)||^p], xhat = eps*real + (1-eps)*fake
/// with real re-paired by a random permutation and eps ~ U(0,1) per pair.
LossResult wgan_div_loss(const Mlp& d, const Matrix& real, const Matrix& fake, double k, double p,
                         std::mt19937_64& rng, PenaltyMode mode = PenaltyMode::analytic);

/// Same loss with the interpolates given explicitly (deterministic; used by tests).
LossResult wgan_div_loss_at(const Mlp& d, const Matrix& real, const Matrix& fake, const Matrix& interpolates,
                            double k, double p, PenaltyMode mode = PenaltyMode::analytic);

double style_reward(double score, RewardMap map);

/// Generator-side objective on fake samples; fills dL/dfake.
/// lsgan: mean (D - 1)^2, wgan_div: -mean D.
double generator_loss(const Mlp& d, const Matrix& fake, Criterion c, Matrix& grad_fake);

/// Discriminator network plus its optimizer.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(int input_dim, const std::vector<int>& hidden, AdversaryConfig cfg, std::mt19937_64& rng);

  /// One optimizer step with gradient clipping; returns the pre-step loss.
  LossResult update(const Matrix& real, const Matrix& fake, std::mt19937_64& rng);
  Vector scores(const Matrix& x) const { return critic_scores(net_, x); }
  Vector rewards(const Matrix& x) const;

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  nn::Adam& optimizer() { return opt_; }
  const nn::Adam& optimizer() const { return opt_; }
  const AdversaryConfig& config() const { return cfg_; }

 private:
  AdversaryConfig cfg_;
  Mlp net_;
  nn::Adam opt_;
};

}  // namespace amphim::adversary
