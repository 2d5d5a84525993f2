#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "amphim/adversary/losses.hpp"
#include "amphim/adversary/mixture.hpp"

using namespace amphim;
using namespace amphim::adversary;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

Mlp random_critic(int in, std::uint64_t seed, nn::Activation act = nn::Activation::tanh) {
  std::mt19937_64 rng(seed);
  Mlp d(nn::make_spec(in, {16, 16}, 1, act));
  d.init(rng);
  return d;
}

Matrix randn(int rows, int cols, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(shift, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

template <typename LossFn>
void check_param_gradient(Mlp d, const Vector& grad, LossFn loss, double tol) {
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < d.params().size(); ++i) {
    const double saved = d.params()[i];
    d.params()[i] = saved + h;
    const double up = loss(d);
    d.params()[i] = saved - h;
    const double down = loss(d);
    d.params()[i] = saved;
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(grad[i]) < 1e-7) continue;
    ASSERT_LT(rel_err(fd, grad[i]), tol) << "param " << i << " fd " << fd << " analytic " << grad[i];
  }
}

}  // namespace

TEST(Critic, ZeroNetScoresZeroAndBatchesConsistently) {
  Mlp zero(nn::make_spec(4, {8}, 1, nn::Activation::tanh));
  motion::TransitionPair p{Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)};
  EXPECT_EQ(critic_score(zero, p), 0.0);

  const Mlp d = random_critic(4, 1);
  const Matrix x = randn(4, 5, 2);
  const Vector batch = critic_scores(d, x);
  for (int j = 0; j < 5; ++j) {
    motion::TransitionPair q{x.col(j).head(2), x.col(j).tail(2)};
    EXPECT_NEAR(critic_score(d, q), batch[j], 1e-15);
    EXPECT_EQ(critic_score(d, q), critic_score(d, q));
  }
  motion::TransitionPair bad{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  EXPECT_THROW(critic_score(d, bad), std::invalid_argument);
}

TEST(Lsgan, ClosedFormValues) {
  Mlp one(nn::make_spec(3, {}, 1, nn::Activation::tanh));
  Mlp zero = one;
  const Matrix real = randn(3, 4, 1), fake = randn(3, 6, 2);
  EXPECT_DOUBLE_EQ(lsgan_loss(zero, real, fake).loss, 2.0);
  // Constant critic can't separate; use a linear one that hits +/-1 exactly.
  Mlp lin(nn::make_spec(1, {}, 1, nn::Activation::tanh));
  lin.weight(0)(0, 0) = 1.0;
  EXPECT_EQ(lsgan_loss(lin, Matrix::Constant(1, 3, 1.0), Matrix::Constant(1, 2, -1.0)).loss, 0.0);
  EXPECT_THROW(lsgan_loss(lin, Matrix(1, 0), Matrix::Constant(1, 2, -1.0)), std::invalid_argument);
}

TEST(Lsgan, GradientMatchesFiniteDifferences) {
  const Mlp d = random_critic(6, 3);
  const Matrix real = randn(6, 7, 4), fake = randn(6, 5, 5, 0.5);
  const LossResult r = lsgan_loss(d, real, fake);
  check_param_gradient(d, r.grad, [&](const Mlp& m) { return lsgan_loss(m, real, fake).loss; }, 1e-4);
}

TEST(WganDiv, ZeroCriticNoPenaltyIsZero) {
  Mlp zero(nn::make_spec(3, {4}, 1, nn::Activation::tanh));
  std::mt19937_64 rng(1);
  EXPECT_EQ(wgan_div_loss(zero, randn(3, 4, 1), randn(3, 4, 2), 0.0, 6.0, rng).loss, 0.0);
  EXPECT_THROW(wgan_div_loss(zero, Matrix(3, 0), randn(3, 4, 2), 2.0, 6.0, rng), std::invalid_argument);
}

TEST(WganDiv, LinearCriticPenaltyIsClosedForm) {
  Mlp lin(nn::make_spec(3, {}, 1, nn::Activation::tanh));
  lin.weight(0) << 0.5, -1.0, 2.0;
  std::mt19937_64 rng(2);
  const double k = 2.0, p = 6.0;
  const LossResult r = wgan_div_loss(lin, randn(3, 8, 3), randn(3, 8, 4), k, p, rng);
  const double w = lin.weight(0).norm();
  EXPECT_NEAR(r.penalty, k * std::pow(w, p), 1e-9 * k * std::pow(w, p));
}

TEST(WganDiv, PenaltyPositiveWhenGradientNonzero) {
  const Mlp d = random_critic(4, 6);
  std::mt19937_64 rng(3);
  EXPECT_GT(wgan_div_loss(d, randn(4, 8, 1), randn(4, 8, 2), 2.0, 6.0, rng).penalty, 0.0);
}

TEST(WganDiv, FullLossGradientMatchesFiniteDifferences) {
  for (auto act : {nn::Activation::tanh, nn::Activation::elu}) {
    const Mlp d = random_critic(5, 7, act);
    const Matrix real = randn(5, 6, 8), fake = randn(5, 6, 9, 0.3), xhat = randn(5, 6, 10);
    const LossResult r = wgan_div_loss_at(d, real, fake, xhat, 2.0, 6.0);
    check_param_gradient(
        d, r.grad, [&](const Mlp& m) { return wgan_div_loss_at(m, real, fake, xhat, 2.0, 6.0).loss; }, 1e-3);
  }
}

TEST(WganDiv, FiniteDifferencePenaltyModeAgrees) {
  const Mlp d = random_critic(3, 11);
  const Matrix real = randn(3, 4, 1), fake = randn(3, 4, 2), xhat = randn(3, 4, 3);
  const LossResult a = wgan_div_loss_at(d, real, fake, xhat, 2.0, 2.0, PenaltyMode::analytic);
  const LossResult f = wgan_div_loss_at(d, real, fake, xhat, 2.0, 2.0, PenaltyMode::finite_difference);
  EXPECT_DOUBLE_EQ(a.loss, f.loss);
  EXPECT_LT((a.grad - f.grad).norm(), 1e-5 * std::max(1.0, a.grad.norm()));
}

TEST(StyleReward, MapsAndBounds) {
  EXPECT_EQ(style_reward(1.0, RewardMap::lsgan_quadratic), 1.0);
  EXPECT_EQ(style_reward(-1.0, RewardMap::lsgan_quadratic), 0.0);
  EXPECT_EQ(style_reward(0.0, RewardMap::bounded_sigmoid), 0.5);
  double prev_s = -1.0, prev_q = -1.0;
  for (double s = -50.0; s <= 50.0; s += 0.01) {
    const double q = style_reward(s, RewardMap::lsgan_quadratic);
    const double g = style_reward(s, RewardMap::bounded_sigmoid);
    ASSERT_GE(q, 0.0);
    ASSERT_LE(q, 1.0);
    ASSERT_GE(g, 0.0);
    ASSERT_LE(g, 1.0);
    ASSERT_GE(g, prev_s);
    if (s <= 1.0) {
      ASSERT_GE(q, prev_q);
    }
    prev_s = g;
    prev_q = q;
  }
}

TEST(Generator, LossGradientMatchesFiniteDifferences) {
  const Mlp d = random_critic(3, 13);
  const Matrix fake = randn(3, 4, 14);
  for (auto c : {Criterion::lsgan, Criterion::wgan_div}) {
    Matrix g;
    generator_loss(d, fake, c, g);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < fake.cols(); ++j) {
      for (Eigen::Index i = 0; i < fake.rows(); ++i) {
        Matrix up = fake, down = fake, scratch;
        up(i, j) += h;
        down(i, j) -= h;
        const double fd = (generator_loss(d, up, c, scratch) - generator_loss(d, down, c, scratch)) / (2 * h);
        EXPECT_LT(rel_err(fd, g(i, j)), 1e-5);
      }
    }
  }
}

TEST(Discriminator, UpdateSeparatesRealFromFake) {
  std::mt19937_64 rng(5);
  AdversaryConfig cfg;
  cfg.lr = 1e-2;
  Discriminator disc(2, {16}, cfg, rng);
  const Matrix real = randn(2, 64, 1, 1.0), fake = randn(2, 64, 2, -1.0);
  const double before = disc.update(real, fake, rng).loss;
  double after = before;
  for (int i = 0; i < 200; ++i) after = disc.update(real, fake, rng).loss;
  EXPECT_LT(after, 0.5 * before);
  EXPECT_GT(disc.rewards(real).mean(), disc.rewards(fake).mean());
}

TEST(Mixture, CoverageScoring) {
  MixtureConfig cfg;
  std::mt19937_64 rng(1);
  const Matrix real = sample_mixture(cfg, 4000, rng);
  const MixtureResult r = score_coverage(real, mixture_centers(cfg), cfg.sigma, cfg.coverage_fraction);
  EXPECT_EQ(r.modes_recovered, 8);
  EXPECT_GT(r.on_mode_fraction, 0.98);
  const Matrix one = Matrix::Constant(2, 100, 0.0).colwise() + mixture_centers(cfg).col(3);
  EXPECT_EQ(score_coverage(one, mixture_centers(cfg), cfg.sigma, 0.02).modes_recovered, 1);
}
