#include "amphim/train/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace amphim::train {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

}  // namespace

ActorCritic::ActorCritic(int policy_in, int critic_in, int action_dim, const PpoConfig& cfg, std::mt19937_64& rng)
    : actor_(nn::make_spec(policy_in, cfg.actor_hidden, action_dim, nn::Activation::elu)),
      critic_(nn::make_spec(critic_in, cfg.critic_hidden, 1, nn::Activation::elu)),
      log_std_(Vector::Constant(action_dim, cfg.init_log_std)) {
  actor_.init(rng, 0.01);
  critic_.init(rng, 1.0);
}

Vector ActorCritic::flat() const {
  Vector p(size());
  p << actor_.params(), log_std_, critic_.params();
  return p;
}

void ActorCritic::set_flat(const Vector& p) {
  if (p.size() != size()) throw std::invalid_argument("ActorCritic::set_flat: size mismatch");
  const Eigen::Index na = actor_.params().size(), ns = log_std_.size();
  actor_.params() = p.head(na);
  log_std_ = p.segment(na, ns);
  critic_.params() = p.tail(critic_.params().size());
}

void ActorCritic::save(io::BinaryWriter& w) const {
  w.magic("ACTC");
  io::save_net(w, actor_);
  w.vec(log_std_);
  io::save_net(w, critic_);
}

void ActorCritic::load(io::BinaryReader& r) {
  r.expect_magic("ACTC");
  actor_ = io::load_net(r, actor_.spec().widths.empty() ? nullptr : &actor_.spec());
  log_std_ = r.vec();
  critic_ = io::load_net(r, critic_.spec().widths.empty() ? nullptr : &critic_.spec());
  if (log_std_.size() != actor_.output_dim()) throw io::FormatError("actor-critic: log std size mismatch");
}

Vector gaussian_log_prob(const Matrix& mean, const Vector& log_std, const Matrix& actions) {
  if (mean.rows() != log_std.size() || actions.rows() != mean.rows() || actions.cols() != mean.cols()) {
    throw std::invalid_argument("gaussian_log_prob: shape mismatch");
  }
  const Vector inv_std = (-log_std.array()).exp().matrix();
  const double norm = log_std.sum() + 0.5 * static_cast<double>(log_std.size()) * kLog2Pi;
  Vector out(mean.cols());
  for (Eigen::Index j = 0; j < mean.cols(); ++j) {
    const Vector z = (actions.col(j) - mean.col(j)).cwiseProduct(inv_std);
    out[j] = -0.5 * z.squaredNorm() - norm;
  }
  return out;
}

double surrogate_ratio_grad(double ratio, double advantage, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return ratio * advantage <= clipped * advantage ? -advantage : 0.0;
}

double surrogate_loss(const Matrix& mean, const Vector& log_std, const Matrix& actions, const Vector& old_log_prob,
                      const Vector& advantages, double clip_eps, Matrix* grad_mean, Vector* grad_log_std,
                      SurrogateStats* stats) {
  const Eigen::Index n = mean.cols();
  if (n == 0 || old_log_prob.size() != n || advantages.size() != n) {
    throw std::invalid_argument("surrogate_loss: batch size mismatch");
  }
  const Vector log_prob = gaussian_log_prob(mean, log_std, actions);
  const Vector inv_var = (-2.0 * log_std.array()).exp().matrix();
  if (grad_mean) *grad_mean = Matrix::Zero(mean.rows(), n);
  if (grad_log_std) *grad_log_std = Vector::Zero(log_std.size());
  double loss = 0.0, kl = 0.0, clipped = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double ratio = std::exp(log_prob[j] - old_log_prob[j]);
    const double a = advantages[j];
    const double c = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    loss -= std::min(ratio * a, c * a) * inv_n;
    kl += (ratio - 1.0) - (log_prob[j] - old_log_prob[j]);
    clipped += std::abs(ratio - 1.0) > clip_eps ? 1.0 : 0.0;
    // d(loss)/d(log_prob) = d(loss)/d(ratio) * ratio.
    const double g = surrogate_ratio_grad(ratio, a, clip_eps) * ratio * inv_n;
    if (g == 0.0) continue;
    const Vector diff = actions.col(j) - mean.col(j);
    if (grad_mean) grad_mean->col(j) = g * diff.cwiseProduct(inv_var);
    if (grad_log_std) *grad_log_std += g * (diff.cwiseAbs2().cwiseProduct(inv_var).array() - 1.0).matrix();
  }
  if (stats) {
    stats->approx_kl = kl * inv_n;
    stats->clip_fraction = clipped * inv_n;
  }
  return loss;
}

double value_loss(const Vector& values, const Vector& targets, Vector* grad) {
  if (values.size() != targets.size() || values.size() == 0) {
    throw std::invalid_argument("value_loss: size mismatch");
  }
  const Vector d = values - targets;
  const double n = static_cast<double>(d.size());
  if (grad) *grad = (2.0 / n) * d;
  return d.squaredNorm() / n;
}

double gaussian_entropy(const Vector& log_std, Vector* grad) {
  if (grad) *grad = Vector::Ones(log_std.size());
  return log_std.sum() + 0.5 * static_cast<double>(log_std.size()) * (1.0 + kLog2Pi);
}

Advantages compute_gae(const Vector& rewards, const Vector& values, const std::vector<char>& dones,
                       const Vector& last_values, int num_envs, double gamma, double lambda) {
  const Eigen::Index total = rewards.size();
  if (num_envs < 1 || total % num_envs != 0 || values.size() != total ||
      static_cast<Eigen::Index>(dones.size()) != total || last_values.size() != num_envs) {
    throw std::invalid_argument("compute_gae: inconsistent batch shapes");
  }
  const Eigen::Index steps = total / num_envs;
  Advantages out{Vector::Zero(total), Vector::Zero(total)};
  for (Eigen::Index e = 0; e < num_envs; ++e) {
    double next_value = last_values[e];
    double gae = 0.0;
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
      const Eigen::Index i = t * num_envs + e;
      const double live = dones[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
      const double delta = rewards[i] + gamma * next_value * live - values[i];
      gae = delta + gamma * lambda * live * gae;
      out.advantages[i] = gae;
      out.returns[i] = gae + values[i];
      next_value = values[i];
    }
  }
  return out;
}

Vector normalize_advantages(const Vector& a) {
  if (a.size() == 0) return a;
  const double mean = a.mean();
  const double var = (a.array() - mean).square().mean();
  const double std = std::sqrt(var);
  if (!(std > 1e-12)) return Vector::Zero(a.size());
  return ((a.array() - mean) / std).matrix();
}

PpoLoss ppo_loss(const ActorCritic& ac, const PpoBatch& batch, const std::vector<Eigen::Index>& cols,
                 const PpoConfig& cfg, Vector* grad) {
  const Matrix x = batch.policy_in(Eigen::all, cols);
  const Matrix xc = batch.critic_in(Eigen::all, cols);
  const Matrix act = batch.actions(Eigen::all, cols);
  const Vector old_lp = batch.old_log_prob(cols);
  const Vector adv = batch.advantages(cols);
  const Vector ret = batch.returns(cols);

  PpoLoss out;
  Mlp::Cache actor_cache, critic_cache;
  const Matrix mean = ac.actor().forward(x, grad ? &actor_cache : nullptr);
  const Matrix v = ac.critic().forward(xc, grad ? &critic_cache : nullptr);
  Matrix g_mean;
  Vector g_log_std, g_value, g_entropy;
  out.surrogate = surrogate_loss(mean, ac.log_std(), act, old_lp, adv, cfg.clip_eps, grad ? &g_mean : nullptr,
                                 grad ? &g_log_std : nullptr, &out.stats);
  out.value = value_loss(v.row(0).transpose(), ret, grad ? &g_value : nullptr);
  out.entropy = gaussian_entropy(ac.log_std(), grad ? &g_entropy : nullptr);
  out.total = out.surrogate + cfg.value_coef * out.value - cfg.entropy_coef * out.entropy;
  if (grad) {
    const Eigen::Index na = ac.actor().params().size(), ns = ac.log_std().size();
    *grad = Vector::Zero(ac.size());
    Vector ga = Vector::Zero(na), gc = Vector::Zero(ac.critic().params().size());
    ac.actor().backward_accumulate(actor_cache, g_mean, ga);
    ac.critic().backward_accumulate(critic_cache, cfg.value_coef * g_value.transpose(), gc);
    grad->head(na) = ga;
    grad->segment(na, ns) = g_log_std - cfg.entropy_coef * g_entropy;
    grad->tail(gc.size()) = gc;
  }
  return out;
}

PpoStats ppo_update(ActorCritic& ac, nn::Adam& opt, const PpoBatch& batch, const PpoConfig& cfg,
                    std::mt19937_64& rng, const std::function<void(const std::vector<Eigen::Index>&)>& on_minibatch) {
  const Eigen::Index n = batch.actions.cols();
  if (n < cfg.minibatches) throw std::invalid_argument("ppo_update: fewer samples than minibatches");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  PpoStats stats;
  int applied = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (int m = 0; m < cfg.minibatches; ++m) {
      const auto lo = static_cast<std::size_t>(n * m / cfg.minibatches);
      const auto hi = static_cast<std::size_t>(n * (m + 1) / cfg.minibatches);
      const std::vector<Eigen::Index> cols(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                           order.begin() + static_cast<std::ptrdiff_t>(hi));
      Vector grad;
      const PpoLoss l = ppo_loss(ac, batch, cols, cfg, &grad);
      if (!std::isfinite(l.total) || !grad.allFinite()) {
        ++stats.skipped;
      } else {
        nn::clip_grad_norm(grad, cfg.grad_clip);
        Vector p = ac.flat();
        opt.step(p, grad);
        ac.set_flat(p);
        stats.surrogate += l.surrogate;
        stats.value_loss += l.value;
        stats.entropy += l.entropy;
        stats.approx_kl += l.stats.approx_kl;
        stats.clip_fraction += l.stats.clip_fraction;
        ++applied;
      }
      if (on_minibatch) on_minibatch(cols);
    }
  }
  if (applied > 0) {
    stats.surrogate /= applied;
    stats.value_loss /= applied;
    stats.entropy /= applied;
    stats.approx_kl /= applied;
    stats.clip_fraction /= applied;
  }
  return stats;
}

}  // namespace amphim::train
