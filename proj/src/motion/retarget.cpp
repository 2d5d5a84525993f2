#include "amphim/motion/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace amphim::motion {
namespace {

double sample(const MotionClip& clip, int joint, double t) {
  const double x = t / clip.dt;
  const auto i = static_cast<std::size_t>(std::floor(x));
  const double w = x - static_cast<double>(i);
  if (i + 1 >= clip.frames.size()) return clip.frames.back().dof_pos[joint];
  return (1.0 - w) * clip.frames[i].dof_pos[joint] + w * clip.frames[i + 1].dof_pos[joint];
}

}  // namespace

double half_period_mirror_error(const MotionClip& clip) {
  if (!(clip.cycle_period > 0.0) || clip.frames.size() < 2) return 0.0;
  const double shift = 0.5 * clip.cycle_period;
  const double t_end = clip.dt * static_cast<double>(clip.frames.size() - 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    const double t = clip.dt * static_cast<double>(i);
    if (t + shift > t_end + 1e-9) break;
    for (int j = 0; j < 2; ++j) {
      const double left = sample(clip, sim::kHipLeft + j, std::min(t + shift, t_end));
      worst = std::max(worst, std::abs(left - clip.frames[i].dof_pos[sim::kHipRight + j]));
    }
  }
  return worst;
}

RetargetResult retarget(const KeypointTrack& track, const sim::RobotMorphology& morph, const RetargetOptions& opts) {
  if (!(morph.leg_length() > 0.0)) throw std::invalid_argument("retarget: robot leg length must be positive");
  track.validate();

  RetargetResult out;
  out.scale = morph.leg_length() / track.source_leg_length();
  const double c = out.scale;
  out.scaled = track;
  out.scaled.source_thigh_length = track.source_thigh_length * c;
  out.scaled.source_shank_length = track.source_shank_length * c;
  out.scaled.nominal_speed = track.nominal_speed * c;
  for (auto& f : out.scaled.frames) {
    f.hip *= c;
    for (int leg = 0; leg < 2; ++leg) {
      f.knee[leg] *= c;
      f.ankle[leg] *= c;
    }
  }

  MotionClip& clip = out.clip;
  clip.dt = track.dt;
  clip.label = track.label;
  clip.nominal_speed = out.scaled.nominal_speed;
  clip.cycle_period = track.cycle_period;
  const std::size_t n = track.frames.size();
  clip.frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const KeypointFrame& f = out.scaled.frames[i];
    ClipFrame& cf = clip.frames[i];
    for (int leg = 0; leg < 2; ++leg) {
      LegAngles a;
      try {
        a = ik_two_link(f.hip, f.ankle[leg], morph.thigh_length, morph.shank_length);
      } catch (const UnreachableTarget& e) {
        throw UnreachableTarget("retarget: frame " + std::to_string(i) + ": " + e.what());
      }
      const int h = leg == 0 ? sim::kHipLeft : sim::kHipRight;
      cf.dof_pos[h] = a.hip;
      cf.dof_pos[h + 1] = a.knee;
    }
    for (int j = 0; j < sim::kNumJoints; ++j) {
      const double q = std::clamp(cf.dof_pos[j], morph.joint_lower[j], morph.joint_upper[j]);
      if (q != cf.dof_pos[j]) ++out.clipped_joints;
      cf.dof_pos[j] = q;
    }
    cf.base_height = f.hip.y();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? n - 1 : i + 1;
    clip.frames[i].base_lin_vel =
        (out.scaled.frames[b].hip - out.scaled.frames[a].hip) / (track.dt * static_cast<double>(b - a));
  }

  out.symmetry_error = half_period_mirror_error(clip);
  if (opts.check_symmetry && out.symmetry_error > opts.symmetry_tolerance) {
    std::ostringstream msg;
    msg << "retarget: clip '" << clip.label << "' mirror error " << out.symmetry_error << " rad exceeds tolerance "
        << opts.symmetry_tolerance;
    throw SymmetryError(msg.str());
  }
  return out;
}

std::vector<MotionClip> default_clips(const sim::RobotMorphology& morph, double dt) {
  constexpr double kSourceLeg = 0.9;
  const double scale = morph.leg_length() / kSourceLeg;
  std::vector<MotionClip> clips;
  const auto add = [&](Gait g, double robot_speed) {
    RetargetResult r = retarget(generate_gait(g, robot_speed / scale, 2.4, dt), morph);
    clips.push_back(std::move(r.clip));
  };
  for (double v : {-0.4, -0.2, 0.2, 0.4}) add(Gait::walk, v);
  for (double v : {0.8, 1.0}) add(Gait::run, v);
  return clips;
}

}  // namespace amphim::motion
