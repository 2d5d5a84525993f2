#include "amphim/curiosity/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace amphim::curiosity {

Eigen::VectorXd curiosity_features(const sim::SimState& s) {
  Eigen::VectorXd f(kFeatureDim);
  f << s.dof_pos, s.base_lin_vel.x(), s.base_lin_vel.y(), s.base_pitch;
  return f;
}

SimHasher::SimHasher(int feature_dim, int bits, std::uint64_t seed) {
  if (feature_dim < 1) throw std::invalid_argument("SimHasher: feature_dim must be positive");
  if (bits < 1 || bits > 64) throw std::invalid_argument("SimHasher: bits must lie in [1, 64]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  projection_.resize(bits, feature_dim);
  for (Eigen::Index j = 0; j < projection_.cols(); ++j)
    for (Eigen::Index i = 0; i < projection_.rows(); ++i) projection_(i, j) = n(rng);
  whitening_ = nn::RunningNormalizer(feature_dim, 0.0);
}

SimHasher::SimHasher(Eigen::MatrixXd projection) : projection_(std::move(projection)) {
  if (projection_.rows() < 1 || projection_.rows() > 64 || projection_.cols() < 1) {
    throw std::invalid_argument("SimHasher: projection must have 1..64 rows");
  }
  whitening_ = nn::RunningNormalizer(projection_.cols(), 0.0);
}

HashCode SimHasher::hash_whitened(const Eigen::VectorXd& w) const {
  if (w.size() != projection_.cols()) {
    throw std::invalid_argument("hash_state: feature dimension " + std::to_string(w.size()) + " != " +
                                std::to_string(projection_.cols()));
  }
  const Eigen::VectorXd y = projection_ * w;
  HashCode code = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) code |= HashCode{1} << i;
  }
  return code;
}

HashCode SimHasher::hash(const Eigen::VectorXd& features) const {
  if (features.size() != projection_.cols()) return hash_whitened(features);  // throws with the message
  return hash_whitened(whitening_.apply(features));
}

void SimHasher::save(io::BinaryWriter& w) const {
  w.magic("HASH");
  w.u64(static_cast<std::uint64_t>(projection_.rows()));
  w.u64(static_cast<std::uint64_t>(projection_.cols()));
  w.vec(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(projection_.data(), projection_.size())));
  whitening_.save(w);
}

void SimHasher::load(io::BinaryReader& r) {
  r.expect_magic("HASH");
  const auto rows = static_cast<Eigen::Index>(r.u64());
  const auto cols = static_cast<Eigen::Index>(r.u64());
  const Eigen::VectorXd flat = r.vec();
  if (flat.size() != rows * cols) throw io::FormatError("hasher: projection size mismatch");
  projection_ = Eigen::Map<const Eigen::MatrixXd>(flat.data(), rows, cols);
  whitening_ = nn::RunningNormalizer(cols, 0.0);
  whitening_.load(r);
}

std::uint64_t CountTable::count(HashCode code) const {
  const auto it = counts_.find(code);
  return it == counts_.end() ? 0 : it->second;
}

void CountTable::merge(const CountTable& other) {
  for (const auto& [code, n] : other.counts_) counts_[code] += n;
  total_ += other.total_;
}

void CountTable::save(io::BinaryWriter& w) const {
  w.magic("CNTS");
  std::vector<std::pair<HashCode, std::uint64_t>> items(counts_.begin(), counts_.end());
  std::sort(items.begin(), items.end());
  w.u64(items.size());
  for (const auto& [code, n] : items) {
    w.u64(code);
    w.u64(n);
  }
  w.u64(total_);
}

void CountTable::load(io::BinaryReader& r) {
  r.expect_magic("CNTS");
  clear();
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    const HashCode code = r.u64();
    counts_[code] = r.u64();
  }
  total_ = r.u64();
}

double curiosity_reward(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("curiosity_reward: count is 0 (observe the state before rewarding)");
  return 1.0 / std::sqrt(static_cast<double>(n));
}

CuriosityModule::CuriosityModule(CuriosityConfig cfg, std::uint64_t seed)
    : cfg_(cfg), hasher_(kFeatureDim, cfg.bits, seed) {
  if (cfg_.warmup_steps < 0) throw std::invalid_argument("curiosity: warmup_steps must be >= 0");
  if (cfg_.warmup_steps == 0) hasher_.freeze();
}

Eigen::VectorXd CuriosityModule::rewards(const Eigen::MatrixXd& features) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(features.cols());
  if (!hasher_.frozen()) {
    hasher_.observe(features);
    steps_seen_ += features.cols();
    if (steps_seen_ >= cfg_.warmup_steps) hasher_.freeze();
    return r;
  }
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    r[j] = curiosity_reward(table_.observe(hasher_.hash(features.col(j))));
  }
  steps_seen_ += features.cols();
  return r;
}

CuriosityStats CuriosityModule::stats(const Eigen::VectorXd& last_rewards) const {
  return {table_.distinct(), table_.total(), last_rewards.size() ? last_rewards.mean() : 0.0};
}

void CuriosityModule::save(io::BinaryWriter& w) const {
  w.magic("CURI");
  w.i64(cfg_.bits);
  w.i64(cfg_.warmup_steps);
  w.i64(steps_seen_);
  hasher_.save(w);
  table_.save(w);
}

void CuriosityModule::load(io::BinaryReader& r) {
  r.expect_magic("CURI");
  cfg_.bits = static_cast<int>(r.i64());
  cfg_.warmup_steps = r.i64();
  steps_seen_ = r.i64();
  hasher_.load(r);
  table_.load(r);
}

}  // namespace amphim::curiosity
