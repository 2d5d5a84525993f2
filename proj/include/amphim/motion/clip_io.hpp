#pragma once

#include <stdexcept>
#include <string>

#include "amphim/motion/clip.hpp"
#include "amphim/motion/gait.hpp"

namespace amphim::motion {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Clip CSV:
//   # amphim-clip v1 dt=<s> label=<name> nominal_speed=<m/s> cycle_period=<s> frames=<n>
//   hip_l,knee_l,hip_r,knee_r,base_height,base_vel_x,base_vel_z
//   <n rows>
void save_clip(const MotionClip& clip, const std::string& path);
/// Validates joint limits against `morph`. Throws ParseError (with line number)
/// or std::invalid_argument (limit violation naming the joint).
MotionClip load_clip(const std::string& path, const sim::RobotMorphology& morph = {});

// Keypoint CSV: same header style with source segment lengths, then
// hip_x,hip_z,knee_l_x,knee_l_z,ankle_l_x,ankle_l_z,knee_r_x,knee_r_z,ankle_r_x,ankle_r_z
void save_keypoints(const KeypointTrack& track, const std::string& path);
KeypointTrack load_keypoints(const std::string& path);

}  // namespace amphim::motion
