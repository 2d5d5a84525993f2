#pragma once

#include <deque>
#include <random>

#include "amphim/sim/types.hpp"

namespace amphim::sim {

/// Noise-free projection of the state onto the observation layout.
ObservationFrame project(const SimState& state, const Command& cmd, const JointVector& last_action);

/// Projection plus independent uniform noise in [-level, level] per channel.
ObservationFrame observe(const SimState& state, const Command& cmd, const JointVector& last_action,
                         const NoiseLevels& noise, std::mt19937_64& rng);

/// Privileged state: dof pos, dof vel, base linear velocity (3), base angular
/// velocity (3), base height.
Eigen::VectorXd hidden_state(const SimState& state);
inline constexpr int kHiddenDim = 4 + 4 + 3 + 3 + 1;

/// Adds velocity impulses to the base.
SimState apply_push(SimState state, double push_lin, double push_ang);

/// Fixed-length window of the most recent observation frames.
class ObservationHistory {
 public:
  explicit ObservationHistory(int length = 6) : length_(length) {}

  void fill(const ObservationFrame& frame);
  void push(const ObservationFrame& frame);
  int length() const { return length_; }
  bool full() const { return static_cast<int>(frames_.size()) == length_; }
  const std::deque<ObservationFrame>& frames() const { return frames_; }  // oldest first
  const ObservationFrame& latest() const { return frames_.back(); }

  /// Oldest-first concatenation.
  Eigen::VectorXd flatten() const;

 private:
  int length_;
  std::deque<ObservationFrame> frames_;
};

}  // namespace amphim::sim
