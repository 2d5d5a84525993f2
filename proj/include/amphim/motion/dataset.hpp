#pragma once

#include <random>
#include <vector>

#include "amphim/motion/clip.hpp"

namespace amphim::motion {

struct TransitionPair {
  Eigen::VectorXd feat_t;
  Eigen::VectorXd feat_t1;
};

/// Immutable expert transition set. Sampling is uniform over (clip, frame)
/// pairs, so clips contribute in proportion to their length. Concurrent
/// readers are safe as long as each brings its own RNG.
class MotionDataset {
 public:
  /// Throws std::invalid_argument on an empty list or a clip with < 2 frames.
  explicit MotionDataset(std::vector<MotionClip> clips);

  const std::vector<MotionClip>& clips() const { return clips_; }
  std::size_t num_pairs() const { return offsets_.back(); }
  TransitionPair pair(std::size_t index) const;
  /// Clip index owning global pair `index`.
  std::size_t clip_of(std::size_t index) const;

  std::vector<TransitionPair> sample(std::size_t batch, std::mt19937_64& rng) const;
  /// Column-stacked [feat_t; feat_t1], 2*kStyleDim x batch.
  Eigen::MatrixXd sample_matrix(std::size_t batch, std::mt19937_64& rng) const;
  /// Every frame's features, kStyleDim x total_frames.
  Eigen::MatrixXd all_features() const;

 private:
  std::vector<MotionClip> clips_;
  std::vector<std::vector<Eigen::VectorXd>> features_;
  std::vector<std::size_t> offsets_;  // cumulative pair counts, front() == 0
};

std::vector<TransitionPair> sample_transitions(const MotionDataset& dataset, std::size_t batch,
                                               std::mt19937_64& rng);

}  // namespace amphim::motion
