#include "amphim/motion/clip.hpp"

#include <stdexcept>

namespace amphim::motion {

JointVector MotionClip::dof_vel(std::size_t i) const {
  const std::size_t n = frames.size();
  if (i >= n) throw std::out_of_range("dof_vel: frame index out of range");
  if (n < 2) return JointVector::Zero();
  if (i == 0) return (frames[1].dof_pos - frames[0].dof_pos) / dt;
  if (i == n - 1) return (frames[n - 1].dof_pos - frames[n - 2].dof_pos) / dt;
  return (frames[i + 1].dof_pos - frames[i - 1].dof_pos) / (2.0 * dt);
}

double MotionClip::mean_base_speed() const {
  if (frames.empty()) return 0.0;
  double s = 0.0;
  for (const auto& f : frames) s += f.base_lin_vel.x();
  return s / static_cast<double>(frames.size());
}

void MotionClip::validate(const sim::RobotMorphology& morph) const {
  if (!(dt > 0.0)) throw std::invalid_argument("clip '" + label + "': dt must be positive");
  if (frames.size() < 2) throw std::invalid_argument("clip '" + label + "': need at least two frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (int j = 0; j < sim::kNumJoints; ++j) {
      const double q = frames[i].dof_pos[j];
      if (!(q >= morph.joint_lower[j] && q <= morph.joint_upper[j])) {
        throw std::invalid_argument("clip '" + label + "': joint " + sim::kJointNames[j] + " at frame " +
                                    std::to_string(i) + " = " + std::to_string(q) + " outside limits");
      }
    }
  }
}

Eigen::VectorXd style_features(const JointVector& dof_pos, const JointVector& dof_vel, double base_height,
                               const sim::Vec2& base_lin_vel) {
  Eigen::VectorXd f(kStyleDim);
  f.segment<4>(0) = dof_pos;
  f.segment<4>(4) = dof_vel;
  f[8] = base_height;
  f.segment<2>(9) = base_lin_vel;
  return f;
}

Eigen::VectorXd style_features(const sim::SimState& s) {
  return style_features(s.dof_pos, s.dof_vel, s.base_pos.y(), s.base_lin_vel);
}

Eigen::VectorXd style_features(const MotionClip& clip, std::size_t i) {
  const ClipFrame& f = clip.frames.at(i);
  return style_features(f.dof_pos, clip.dof_vel(i), f.base_height, f.base_lin_vel);
}

}  // namespace amphim::motion
