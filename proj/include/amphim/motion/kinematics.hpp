#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace amphim::motion {

using Vec2 = Eigen::Vector2d;

class UnreachableTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hip angle is the thigh's absolute angle from the downward vertical
/// (positive swings the foot backward); knee angle is flexion (>= 0).
struct LegAngles {
  double hip = 0.0;
  double knee = 0.0;
};

/// Closed-form two-link inverse kinematics with the knee bending anatomically
/// (knee ahead of the hip-foot line). Throws UnreachableTarget when the target
/// distance lies outside [|l1 - l2|, l1 + l2].
LegAngles ik_two_link(const Vec2& hip_pos, const Vec2& foot_target, double l1, double l2);

Vec2 fk_knee(const Vec2& hip_pos, double hip_angle, double l1);
Vec2 fk_two_link(const Vec2& hip_pos, const LegAngles& angles, double l1, double l2);

}  // namespace amphim::motion
