#include "amphim/adversary/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace amphim::adversary {
namespace {

void require_batches(const Mlp& d, const Matrix& real, const Matrix& fake) {
  if (real.cols() == 0 || fake.cols() == 0) throw std::invalid_argument("discriminator loss: empty batch");
  if (real.rows() != d.input_dim() || fake.rows() != d.input_dim()) {
    throw std::invalid_argument("discriminator loss: feature dimension mismatch");
  }
}

double penalty_value(const Mlp& d, const Matrix& x, double p) {
  const Matrix g = d.input_gradient(x);
  double s = 0.0;
  for (Eigen::Index b = 0; b < g.cols(); ++b) s += std::pow(g.col(b).norm(), p);
  return s;
}

}  // namespace

const char* to_string(Criterion c) { return c == Criterion::lsgan ? "lsgan" : "wgan_div"; }

Criterion criterion_from_string(const std::string& s) {
  if (s == "lsgan") return Criterion::lsgan;
  if (s == "wgan_div") return Criterion::wgan_div;
  throw std::invalid_argument("unknown criterion '" + s + "' (expected lsgan or wgan_div)");
}

const char* to_string(RewardMap m) { return m == RewardMap::lsgan_quadratic ? "lsgan_quadratic" : "bounded_sigmoid"; }

RewardMap reward_map_from_string(const std::string& s) {
  if (s == "lsgan_quadratic") return RewardMap::lsgan_quadratic;
  if (s == "bounded_sigmoid") return RewardMap::bounded_sigmoid;
  throw std::invalid_argument("unknown reward map '" + s + "'");
}

void AdversaryConfig::validate() const {
  if (!(wgan_k >= 0.0)) throw std::invalid_argument("adversary: wgan_k must be >= 0");
  if (!(wgan_p >= 1.0)) throw std::invalid_argument("adversary: wgan_p must be >= 1");
  if (!(style_weight >= 0.0)) throw std::invalid_argument("adversary: style_weight must be >= 0");
  if (updates_per_iteration < 0) throw std::invalid_argument("adversary: updates_per_iteration must be >= 0");
  if (!(grad_clip > 0.0) || !(lr > 0.0)) throw std::invalid_argument("adversary: grad_clip and lr must be positive");
}

Vector critic_scores(const Mlp& d, const Matrix& x) {
  if (d.output_dim() != 1) throw std::invalid_argument("critic_scores: discriminator output must be scalar");
  return d.forward(x).row(0).transpose();
}

double critic_score(const Mlp& d, const motion::TransitionPair& pair) {
  if (pair.feat_t.size() != pair.feat_t1.size() || pair.feat_t.size() + pair.feat_t1.size() != d.input_dim()) {
    throw std::invalid_argument("critic_score: pair dimension does not match the discriminator");
  }
  Vector x(d.input_dim());
  x << pair.feat_t, pair.feat_t1;
  return critic_scores(d, x)[0];
}

LossResult lsgan_loss(const Mlp& d, const Matrix& real, const Matrix& fake) {
  require_batches(d, real, fake);
  LossResult out;
  out.grad = Vector::Zero(d.params().size());
  const double nr = static_cast<double>(real.cols()), nf = static_cast<double>(fake.cols());

  Mlp::Cache cache;
  const Matrix dr = d.forward(real, &cache);
  out.real_mean = dr.mean();
  out.loss += (dr.array() - 1.0).square().sum() / nr;
  d.backward_accumulate(cache, (2.0 / nr) * (dr.array() - 1.0).matrix(), out.grad);

  const Matrix df = d.forward(fake, &cache);
  out.fake_mean = df.mean();
  out.loss += (df.array() + 1.0).square().sum() / nf;
  d.backward_accumulate(cache, (2.0 / nf) * (df.array() + 1.0).matrix(), out.grad);
  return out;
}

LossResult wgan_div_loss_at(const Mlp& d, const Matrix& real, const Matrix& fake, const Matrix& interpolates, double k,
                            double p, PenaltyMode mode) {
  require_batches(d, real, fake);
  if (!(k >= 0.0) || !(p >= 1.0)) throw std::invalid_argument("wgan_div_loss: need k >= 0 and p >= 1");
  if (interpolates.cols() == 0 || interpolates.rows() != d.input_dim()) {
    throw std::invalid_argument("wgan_div_loss: interpolates shape mismatch");
  }
  LossResult out;
  out.grad = Vector::Zero(d.params().size());
  const double nr = static_cast<double>(real.cols()), nf = static_cast<double>(fake.cols());

  Mlp::Cache cache;
  const Matrix dr = d.forward(real, &cache);
  out.real_mean = dr.mean();
  d.backward_accumulate(cache, Matrix::Constant(1, real.cols(), -1.0 / nr), out.grad);
  const Matrix df = d.forward(fake, &cache);
  out.fake_mean = df.mean();
  d.backward_accumulate(cache, Matrix::Constant(1, fake.cols(), 1.0 / nf), out.grad);

  const double w = k / static_cast<double>(interpolates.cols());
  if (k > 0.0) {
    if (mode == PenaltyMode::analytic) {
      out.penalty = d.gradient_norm_penalty(interpolates, p, w, out.grad);
    } else {
      out.penalty = w * penalty_value(d, interpolates, p);
      Mlp probe = d;
      const double h = 1e-6;
      for (Eigen::Index i = 0; i < probe.params().size(); ++i) {
        const double saved = probe.params()[i];
        probe.params()[i] = saved + h;
        const double up = penalty_value(probe, interpolates, p);
        probe.params()[i] = saved - h;
        const double down = penalty_value(probe, interpolates, p);
        probe.params()[i] = saved;
        out.grad[i] += w * (up - down) / (2.0 * h);
      }
    }
  }
  out.loss = out.fake_mean - out.real_mean + out.penalty;
  return out;
}

LossResult wgan_div_loss(const Mlp& d, const Matrix& real, const Matrix& fake, double k, double p,
                         std::mt19937_64& rng, PenaltyMode mode) {
  require_batches(d, real, fake);
  const Eigen::Index n = std::min(real.cols(), fake.cols());
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(real.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix xhat(real.rows(), n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const double eps = u(rng);
    xhat.col(b) = eps * real.col(perm[static_cast<std::size_t>(b)]) + (1.0 - eps) * fake.col(b);
  }
  return wgan_div_loss_at(d, real, fake, xhat, k, p, mode);
}

double style_reward(double score, RewardMap map) {
  if (map == RewardMap::lsgan_quadratic) return std::max(0.0, 1.0 - 0.25 * (score - 1.0) * (score - 1.0));
  if (score >= 0.0) return 1.0 / (1.0 + std::exp(-score));
  const double e = std::exp(score);
  return e / (1.0 + e);
}

double generator_loss(const Mlp& d, const Matrix& fake, Criterion c, Matrix& grad_fake) {
  if (fake.cols() == 0) throw std::invalid_argument("generator_loss: empty batch");
  const double n = static_cast<double>(fake.cols());
  Mlp::Cache cache;
  const Matrix s = d.forward(fake, &cache);
  Matrix g;
  double loss;
  if (c == Criterion::lsgan) {
    loss = (s.array() - 1.0).square().sum() / n;
    g = (2.0 / n) * (s.array() - 1.0).matrix();
  } else {
    loss = -s.sum() / n;
    g = Matrix::Constant(1, fake.cols(), -1.0 / n);
  }
  Vector scratch = Vector::Zero(d.params().size());
  grad_fake = d.backward_accumulate(cache, g, scratch);
  return loss;
}

Discriminator::Discriminator(int input_dim, const std::vector<int>& hidden, AdversaryConfig cfg, std::mt19937_64& rng)
    : cfg_(cfg), net_(nn::make_spec(input_dim, hidden, 1, nn::Activation::tanh)) {
  cfg_.validate();
  net_.init(rng);
  opt_ = nn::Adam(net_.params().size(), {cfg_.lr});
}

LossResult Discriminator::update(const Matrix& real, const Matrix& fake, std::mt19937_64& rng) {
  LossResult r = cfg_.criterion == Criterion::lsgan
                     ? lsgan_loss(net_, real, fake)
                     : wgan_div_loss(net_, real, fake, cfg_.wgan_k, cfg_.wgan_p, rng, cfg_.penalty_mode);
  nn::clip_grad_norm(r.grad, cfg_.grad_clip);
  opt_.step(net_.params(), r.grad);
  return r;
}

Vector Discriminator::rewards(const Matrix& x) const {
  Vector s = scores(x);
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = style_reward(s[i], cfg_.reward_map);
  return s;
}

}  // namespace amphim::adversary
