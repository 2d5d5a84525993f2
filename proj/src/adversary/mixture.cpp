#include "amphim/adversary/mixture.hpp"

#include <cmath>

namespace amphim::adversary {
namespace {

Matrix gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = n(rng);
  return m;
}

}  // namespace

Matrix mixture_centers(const MixtureConfig& cfg) {
  Matrix c(2, cfg.modes);
  for (int k = 0; k < cfg.modes; ++k) {
    const double a = 2.0 * M_PI * k / cfg.modes;
    c(0, k) = cfg.radius * std::cos(a);
    c(1, k) = cfg.radius * std::sin(a);
  }
  return c;
}

Matrix sample_mixture(const MixtureConfig& cfg, int n, std::mt19937_64& rng) {
  const Matrix centers = mixture_centers(cfg);
  std::uniform_int_distribution<int> pick(0, cfg.modes - 1);
  Matrix x = cfg.sigma * gaussian(2, n, rng);
  for (int j = 0; j < n; ++j) x.col(j) += centers.col(pick(rng));
  return x;
}

MixtureResult score_coverage(const Matrix& samples, const Matrix& centers, double sigma, double fraction) {
  MixtureResult r;
  r.mode_counts.assign(static_cast<std::size_t>(centers.cols()), 0);
  int on_mode = 0;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index k = 0; k < centers.cols(); ++k) {
      if ((samples.col(j) - centers.col(k)).norm() <= 3.0 * sigma) {
        ++r.mode_counts[static_cast<std::size_t>(k)];
        ++on_mode;
        break;
      }
    }
  }
  const double need = fraction * static_cast<double>(samples.cols());
  for (int c : r.mode_counts) r.modes_recovered += static_cast<double>(c) >= need;
  r.on_mode_fraction = samples.cols() ? static_cast<double>(on_mode) / static_cast<double>(samples.cols()) : 0.0;
  return r;
}

MixtureResult run_mixture(Criterion criterion, const MixtureConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mlp gen(nn::make_spec(cfg.latent_dim, cfg.generator_hidden, 2, nn::Activation::elu));
  gen.init(rng);
  Mlp critic(nn::make_spec(2, cfg.critic_hidden, 1, nn::Activation::tanh));
  critic.init(rng);
  nn::Adam gen_opt(gen.params().size(), {cfg.generator_lr, cfg.beta1, cfg.beta2});
  nn::Adam critic_opt(critic.params().size(), {cfg.critic_lr, cfg.beta1, cfg.beta2});

  for (int step = 0; step < cfg.steps; ++step) {
    for (int u = 0; u < cfg.critic_updates; ++u) {
      const Matrix real = sample_mixture(cfg, cfg.batch, rng);
      const Matrix fake = gen.forward(gaussian(cfg.latent_dim, cfg.batch, rng));
      LossResult l = criterion == Criterion::lsgan
                         ? lsgan_loss(critic, real, fake)
                         : wgan_div_loss(critic, real, fake, cfg.wgan_k, cfg.wgan_p, rng);
      nn::clip_grad_norm(l.grad, 10.0);
      critic_opt.step(critic.params(), l.grad);
    }
    Mlp::Cache cache;
    const Matrix fake = gen.forward(gaussian(cfg.latent_dim, cfg.batch, rng), &cache);
    Matrix grad_fake;
    generator_loss(critic, fake, criterion, grad_fake);
    Vector g = Vector::Zero(gen.params().size());
    gen.backward_accumulate(cache, grad_fake, g);
    nn::clip_grad_norm(g, 10.0);
    gen_opt.step(gen.params(), g);
  }

  const Matrix samples = gen.forward(gaussian(cfg.latent_dim, cfg.eval_samples, rng));
  return score_coverage(samples, mixture_centers(cfg), cfg.sigma, cfg.coverage_fraction);
}

}  // namespace amphim::adversary
