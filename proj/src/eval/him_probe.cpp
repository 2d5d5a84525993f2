#include "amphim/eval/him_probe.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace amphim::eval {

Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int iterations, double lr,
                             double l2) {
  if (x.cols() != y.size() || x.cols() == 0) throw std::invalid_argument("logistic: shape mismatch");
  const Eigen::Index d = x.rows();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(x.cols());
  for (int it = 0; it < iterations; ++it) {
    const Eigen::ArrayXd logits = ((w.transpose() * x).transpose().array() + b);
    const Eigen::VectorXd err = (1.0 / (1.0 + (-logits).exp()) - y.array()).matrix();
    w -= lr * (x * err * inv_n + l2 * w);
    b -= lr * err.sum() * inv_n;
  }
  Eigen::VectorXd out(d + 1);
  out << w, b;
  return out;
}

double logistic_accuracy(const Eigen::VectorXd& wb, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index d = x.rows();
  int correct = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double logit = wb.head(d).dot(x.col(j)) + wb[d];
    correct += (logit > 0.0) == (y[j] > 0.5) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(x.cols());
}

HimProbeReport him_probe(const LoadedPolicy& p, const HimProbeOptions& opts) {
  if (!p.policy->him) throw std::invalid_argument("him probe: checkpoint has no estimator");
  const auto& snap = *p.policy;
  const int latent = snap.him->config().latent_dim;
  PolicyAgent agent(eval_config(p.config, opts.episode_s), p.policy);
  const int steps = static_cast<int>(std::lround(opts.episode_s / agent.dt()));
  const int warmup = static_cast<int>(std::lround(opts.warmup_s / agent.dt()));
  if (steps <= warmup) throw std::invalid_argument("him probe: episode shorter than warmup");

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> walk(-opts.walk_max, opts.walk_max), run(opts.run_lo, opts.run_hi);
  std::vector<Eigen::VectorXd> z_train, z_test;
  std::vector<double> y_train, y_test;
  double err = 0.0, zero = 0.0;
  int n = 0;
  for (int e = 0; e < 2 * opts.episodes_per_class; ++e) {
    const bool is_run = e % 2 == 1;
    const double cmd = is_run ? run(rng) : walk(rng);
    // Episodes alternate between fitting and held-out sets in pairs, one of each class.
    const bool held_out = (e / 2) % 2 == 1;
    agent.reset(opts.seed * 1000 + static_cast<std::uint64_t>(e));
    for (int k = 0; k < steps; ++k) {
      agent.step(cmd);
      if (k < warmup) continue;
      const Eigen::VectorXd hist = snap.normalized_histories(agent.env().history());
      const him::HimOutput out = snap.him->encode(hist);
      const Eigen::Vector3d v = agent.env().true_velocity();
      err += std::abs(out.v_hat.x() - v.x()) + std::abs(out.v_hat.z() - v.z());
      zero += std::abs(v.x()) + std::abs(v.z());
      ++n;
      (held_out ? z_test : z_train).push_back(out.z);
      (held_out ? y_test : y_train).push_back(is_run ? 1.0 : 0.0);
    }
  }
  const auto stack = [latent](const std::vector<Eigen::VectorXd>& cols) {
    Eigen::MatrixXd m(latent, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = cols[j];
    return m;
  };
  const Eigen::MatrixXd xtr = stack(z_train), xte = stack(z_test);
  const Eigen::VectorXd ytr = Eigen::Map<const Eigen::VectorXd>(y_train.data(), static_cast<Eigen::Index>(y_train.size()));
  const Eigen::VectorXd yte = Eigen::Map<const Eigen::VectorXd>(y_test.data(), static_cast<Eigen::Index>(y_test.size()));
  const Eigen::VectorXd wb = fit_logistic(xtr, ytr);

  HimProbeReport r;
  r.samples = n;
  r.velocity_mae = err / (2.0 * n);
  r.zero_mae = zero / (2.0 * n);
  r.probe_train_accuracy = logistic_accuracy(wb, xtr, ytr);
  r.probe_test_accuracy = logistic_accuracy(wb, xte, yte);
  return r;
}

}  // namespace amphim::eval
