#pragma once

#include <string>
#include <vector>

#include "amphim/sim/types.hpp"

namespace amphim::motion {

using sim::JointVector;

struct ClipFrame {
  JointVector dof_pos = JointVector::Zero();
  double base_height = 0.0;
  sim::Vec2 base_lin_vel = sim::Vec2::Zero();  // (x, z)
};

struct MotionClip {
  double dt = 0.02;
  std::vector<ClipFrame> frames;
  std::string label;
  double nominal_speed = 0.0;
  double cycle_period = 0.0;  // 0 when aperiodic

  std::size_t size() const { return frames.size(); }
  /// Central differences inside, one-sided at the ends.
  JointVector dof_vel(std::size_t i) const;
  double mean_base_speed() const;
  /// Throws std::invalid_argument naming the joint and frame on a limit violation.
  void validate(const sim::RobotMorphology& morph) const;
};

/// Discriminator feature map: dof_pos(4), dof_vel(4), base_height, base_lin_vel(2).
inline constexpr int kStyleDim = 11;

Eigen::VectorXd style_features(const JointVector& dof_pos, const JointVector& dof_vel, double base_height,
                               const sim::Vec2& base_lin_vel);
Eigen::VectorXd style_features(const sim::SimState& state);
Eigen::VectorXd style_features(const MotionClip& clip, std::size_t i);

}  // namespace amphim::motion
