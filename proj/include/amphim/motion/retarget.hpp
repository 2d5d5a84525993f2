#pragma once

#include "amphim/motion/clip.hpp"
#include "amphim/motion/gait.hpp"

namespace amphim::motion {

class SymmetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RetargetOptions {
  double symmetry_tolerance = 1e-3;  // rad
  bool check_symmetry = true;
};

struct RetargetResult {
  MotionClip clip;
  KeypointTrack scaled;  // keypoints in robot scale
  double scale = 1.0;
  int clipped_joints = 0;  // joint samples clamped to limits
  double symmetry_error = 0.0;
};

/// Scales the track to the robot leg length and solves per-leg IK every frame.
/// Throws UnreachableTarget (with the frame index) or SymmetryError.
RetargetResult retarget(const KeypointTrack& track, const sim::RobotMorphology& morph,
                        const RetargetOptions& opts = {});

/// Max |left(t + T/2) - right(t)| over hip and knee, linear interpolation in time.
double half_period_mirror_error(const MotionClip& clip);

/// Default reference set: walk at -0.4, -0.2, 0.2, 0.4 m/s and run at 0.8, 1.0 m/s
/// (robot-frame speeds), 2.4 s each.
std::vector<MotionClip> default_clips(const sim::RobotMorphology& morph, double dt = 0.02);

}  // namespace amphim::motion
