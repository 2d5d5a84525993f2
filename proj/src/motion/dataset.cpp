#include "amphim/motion/dataset.hpp"

#include <algorithm>
#include <stdexcept>

namespace amphim::motion {

MotionDataset::MotionDataset(std::vector<MotionClip> clips) : clips_(std::move(clips)) {
  if (clips_.empty()) throw std::invalid_argument("motion dataset: no clips");
  offsets_.push_back(0);
  for (const auto& c : clips_) {
    if (c.frames.size() < 2) throw std::invalid_argument("motion dataset: clip '" + c.label + "' has < 2 frames");
    std::vector<Eigen::VectorXd> f;
    f.reserve(c.frames.size());
    for (std::size_t i = 0; i < c.frames.size(); ++i) f.push_back(style_features(c, i));
    features_.push_back(std::move(f));
    offsets_.push_back(offsets_.back() + c.frames.size() - 1);
  }
}

std::size_t MotionDataset::clip_of(std::size_t index) const {
  if (index >= num_pairs()) throw std::out_of_range("motion dataset: pair index out of range");
  return static_cast<std::size_t>(std::upper_bound(offsets_.begin(), offsets_.end(), index) - offsets_.begin()) - 1;
}

TransitionPair MotionDataset::pair(std::size_t index) const {
  const std::size_t c = clip_of(index);
  const std::size_t i = index - offsets_[c];
  return {features_[c][i], features_[c][i + 1]};
}

std::vector<TransitionPair> MotionDataset::sample(std::size_t batch, std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, num_pairs() - 1);
  std::vector<TransitionPair> out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) out.push_back(pair(pick(rng)));
  return out;
}

Eigen::MatrixXd MotionDataset::sample_matrix(std::size_t batch, std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, num_pairs() - 1);
  Eigen::MatrixXd m(2 * kStyleDim, static_cast<Eigen::Index>(batch));
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t index = pick(rng);
    const std::size_t c = clip_of(index);
    const std::size_t i = index - offsets_[c];
    m.col(static_cast<Eigen::Index>(b)) << features_[c][i], features_[c][i + 1];
  }
  return m;
}

Eigen::MatrixXd MotionDataset::all_features() const {
  std::size_t total = 0;
  for (const auto& f : features_) total += f.size();
  Eigen::MatrixXd m(kStyleDim, static_cast<Eigen::Index>(total));
  Eigen::Index k = 0;
  for (const auto& clip : features_)
    for (const auto& f : clip) m.col(k++) = f;
  return m;
}

std::vector<TransitionPair> sample_transitions(const MotionDataset& dataset, std::size_t batch,
                                               std::mt19937_64& rng) {
  return dataset.sample(batch, rng);
}

}  // namespace amphim::motion
