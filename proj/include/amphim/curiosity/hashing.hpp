#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>

#include "amphim/io/binary_io.hpp"
#include "amphim/nn/normalizer.hpp"
#include "amphim/sim/types.hpp"

namespace amphim::curiosity {

using HashCode = std::uint64_t;

/// Curiosity features: dof_pos(4), base_lin_vel(2), base_pitch.
inline constexpr int kFeatureDim = 7;
Eigen::VectorXd curiosity_features(const sim::SimState& s);

/// Sign hashing of whitened features through a fixed Gaussian projection.
class SimHasher {
 public:
  SimHasher() = default;
  SimHasher(int feature_dim, int bits, std::uint64_t seed);
  /// Uses `projection` (bits x feature_dim) as is.
  explicit SimHasher(Eigen::MatrixXd projection);

  /// Feeds whitening statistics; ignored once frozen.
  void observe(const Eigen::MatrixXd& features) { whitening_.update(features); }
  void freeze() { whitening_.freeze(); }
  bool frozen() const { return whitening_.frozen(); }

  HashCode hash(const Eigen::VectorXd& features) const;
  /// Hash of an already-whitened vector.
  HashCode hash_whitened(const Eigen::VectorXd& w) const;

  int bits() const { return static_cast<int>(projection_.rows()); }
  int feature_dim() const { return static_cast<int>(projection_.cols()); }
  const Eigen::MatrixXd& projection() const { return projection_; }
  const nn::RunningNormalizer& whitening() const { return whitening_; }

  void save(io::BinaryWriter& w) const;
  void load(io::BinaryReader& r);

 private:
  Eigen::MatrixXd projection_;
  nn::RunningNormalizer whitening_;
};

class CountTable {
 public:
  /// Increments and returns the post-increment count.
  std::uint64_t observe(HashCode code) {
    ++total_;
    return ++counts_[code];
  }
  std::uint64_t count(HashCode code) const;
  std::uint64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }
  /// Adds every count of `other` into this table.
  void merge(const CountTable& other);
  void clear() {
    counts_.clear();
    total_ = 0;
  }
  const std::unordered_map<HashCode, std::uint64_t>& counts() const { return counts_; }

  void save(io::BinaryWriter& w) const;
  void load(io::BinaryReader& r);

 private:
  std::unordered_map<HashCode, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// 1/sqrt(n); throws std::invalid_argument for n == 0.
double curiosity_reward(std::uint64_t n);

struct CuriosityConfig {
  int bits = 32;
  std::int64_t warmup_steps = 10000;
};

struct CuriosityStats {
  std::size_t distinct = 0;
  std::uint64_t total = 0;
  double mean_reward = 0.0;
};

/// Hasher plus table. During warmup the whitening statistics accumulate and the
/// bonus is 0; afterwards the whitening is frozen and visits are counted.
class CuriosityModule {
 public:
  CuriosityModule() = default;
  CuriosityModule(CuriosityConfig cfg, std::uint64_t seed);

  /// One reward per column, processed in column order.
  Eigen::VectorXd rewards(const Eigen::MatrixXd& features);

  const SimHasher& hasher() const { return hasher_; }
  const CountTable& table() const { return table_; }
  std::int64_t steps_seen() const { return steps_seen_; }
  bool warming_up() const { return !hasher_.frozen(); }
  CuriosityStats stats(const Eigen::VectorXd& last_rewards) const;

  void save(io::BinaryWriter& w) const;
  void load(io::BinaryReader& r);

 private:
  CuriosityConfig cfg_;
  SimHasher hasher_;
  CountTable table_;
  std::int64_t steps_seen_ = 0;
};

}  // namespace amphim::curiosity
