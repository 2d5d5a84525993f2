#pragma once

#include <array>
#include <string>
#include <vector>

#include "amphim/motion/kinematics.hpp"

namespace amphim::motion {

enum class Gait { walk, run };

const char* to_string(Gait g);
Gait gait_from_string(const std::string& s);

struct KeypointFrame {
  Vec2 hip = Vec2::Zero();
  std::array<Vec2, 2> knee{Vec2::Zero(), Vec2::Zero()};   // left, right
  std::array<Vec2, 2> ankle{Vec2::Zero(), Vec2::Zero()};  // left, right
};

/// Source-skeleton keypoints (x forward, z up, ground at z = 0).
struct KeypointTrack {
  double dt = 0.02;
  std::vector<KeypointFrame> frames;
  double source_thigh_length = 0.45;
  double source_shank_length = 0.45;
  std::string label;
  double nominal_speed = 0.0;
  double cycle_period = 0.0;

  double source_leg_length() const { return source_thigh_length + source_shank_length; }
  /// dt > 0, at least two frames, segment lengths respected within 1e-6.
  void validate() const;
};

struct GaitParams {
  double period;        // s
  double duty_factor;   // stance fraction per leg
  double hip_height;    // m, source scale
  double hip_bob;       // m, amplitude at twice the stride frequency
  double lift;          // m, swing apex
  double min_speed;
  double max_speed;
};

GaitParams gait_params(Gait g);

/// Periodic synthetic gait on a 0.45 m + 0.45 m source leg. The right leg
/// runs half a cycle behind the left. Throws std::invalid_argument when the
/// speed is outside the gait envelope or the duration is shorter than a cycle.
KeypointTrack generate_gait(Gait gait, double speed, double duration, double dt);

/// Whether the ankle keypoint of `leg` touches the ground in frame `i`.
bool ankle_on_ground(const KeypointTrack& track, std::size_t i, int leg, double tol = 1e-9);

}  // namespace amphim::motion
