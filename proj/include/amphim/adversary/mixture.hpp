#pragma once

#include <cstdint>
#include <vector>

#include "amphim/adversary/losses.hpp"

namespace amphim::adversary {

/// Adversarial fit of a small generator to a ring of 2-D Gaussians.
struct MixtureConfig {
  int modes = 8;
  double radius = 2.0;
  double sigma = 0.05;
  int latent_dim = 2;
  std::vector<int> generator_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  int steps = 3000;
  int batch = 256;
  int critic_updates = 2;
  double generator_lr = 1e-3;
  double critic_lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double wgan_k = 2.0;
  double wgan_p = 6.0;
  int eval_samples = 2000;
  double coverage_fraction = 0.02;  // of samples within 3 sigma for a mode to count
};

struct MixtureResult {
  int modes_recovered = 0;
  std::vector<int> mode_counts;  // samples within 3 sigma of each center
  double on_mode_fraction = 0.0;
};

Matrix mixture_centers(const MixtureConfig& cfg);  // 2 x modes
Matrix sample_mixture(const MixtureConfig& cfg, int n, std::mt19937_64& rng);

/// Counts samples within 3 sigma of each center; a mode is recovered when its
/// count reaches `fraction` of the samples.
MixtureResult score_coverage(const Matrix& samples, const Matrix& centers, double sigma, double fraction);

MixtureResult run_mixture(Criterion criterion, const MixtureConfig& cfg, std::uint64_t seed);

}  // namespace amphim::adversary
