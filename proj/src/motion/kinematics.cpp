#include "amphim/motion/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace amphim::motion {
namespace {

constexpr double kReachSlack = 1e-12;

Vec2 dir(double phi) { return {-std::sin(phi), -std::cos(phi)}; }

}  // namespace

LegAngles ik_two_link(const Vec2& hip_pos, const Vec2& foot_target, double l1, double l2) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw std::invalid_argument("ik_two_link: link lengths must be positive");
  const Vec2 d = foot_target - hip_pos;
  const double r = d.norm();
  if (!std::isfinite(r) || r > l1 + l2 + kReachSlack || r < std::abs(l1 - l2) - kReachSlack || r == 0.0) {
    std::ostringstream msg;
    msg << "ik_two_link: target at distance " << r << " outside reachable band [" << std::abs(l1 - l2) << ", "
        << l1 + l2 << "]";
    throw UnreachableTarget(msg.str());
  }
  const double cos_inner = std::clamp((l1 * l1 + l2 * l2 - r * r) / (2.0 * l1 * l2), -1.0, 1.0);
  const double cos_thigh = std::clamp((l1 * l1 + r * r - l2 * l2) / (2.0 * l1 * r), -1.0, 1.0);
  const double line = std::atan2(-d.x(), -d.y());
  LegAngles a;
  a.knee = M_PI - std::acos(cos_inner);
  a.hip = line - std::acos(cos_thigh);
  return a;
}

Vec2 fk_knee(const Vec2& hip_pos, double hip_angle, double l1) { return hip_pos + l1 * dir(hip_angle); }

Vec2 fk_two_link(const Vec2& hip_pos, const LegAngles& angles, double l1, double l2) {
  return fk_knee(hip_pos, angles.hip, l1) + l2 * dir(angles.hip + angles.knee);
}

}  // namespace amphim::motion
