#include "amphim/motion/gait.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace amphim::motion {

const char* to_string(Gait g) { return g == Gait::walk ? "walk" : "run"; }

Gait gait_from_string(const std::string& s) {
  if (s == "walk") return Gait::walk;
  if (s == "run") return Gait::run;
  throw std::invalid_argument("unknown gait '" + s + "' (expected walk or run)");
}

GaitParams gait_params(Gait g) {
  if (g == Gait::walk) return {0.8, 0.6, 0.85, 0.01, 0.08, -0.8, 0.8};
  return {0.6, 0.35, 0.82, 0.015, 0.12, 0.8, 2.4};
}

void KeypointTrack::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("keypoint track: dt must be positive");
  if (frames.size() < 2) throw std::invalid_argument("keypoint track: need at least two frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    for (int leg = 0; leg < 2; ++leg) {
      const double thigh = (f.knee[leg] - f.hip).norm();
      const double shank = (f.ankle[leg] - f.knee[leg]).norm();
      if (std::abs(thigh - source_thigh_length) > 1e-6 || std::abs(shank - source_shank_length) > 1e-6) {
        throw std::invalid_argument("keypoint track: frame " + std::to_string(i) +
                                    " violates source segment lengths");
      }
    }
  }
}

KeypointTrack generate_gait(Gait gait, double speed, double duration, double dt) {
  const GaitParams p = gait_params(gait);
  if (!(speed >= p.min_speed && speed <= p.max_speed)) {
    std::ostringstream msg;
    msg << to_string(gait) << " speed " << speed << " m/s outside valid range [" << p.min_speed << ", "
        << p.max_speed << "]";
    throw std::invalid_argument(msg.str());
  }
  if (!(dt > 0.0)) throw std::invalid_argument("generate_gait: dt must be positive");
  if (duration + 1e-9 < p.period) {
    throw std::invalid_argument("generate_gait: duration shorter than one gait cycle (" + std::to_string(p.period) +
                                " s)");
  }

  KeypointTrack track;
  track.dt = dt;
  track.label = to_string(gait);
  track.nominal_speed = speed;
  track.cycle_period = p.period;
  const double l1 = track.source_thigh_length, l2 = track.source_shank_length;
  const double stroke = speed * p.duty_factor * p.period;

  const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
  track.frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    KeypointFrame& f = track.frames[i];
    f.hip = {speed * t, p.hip_height + p.hip_bob * std::cos(4.0 * M_PI * t / p.period)};
    for (int leg = 0; leg < 2; ++leg) {
      double phase = t / p.period + (leg == 0 ? 0.0 : 0.5);
      phase -= std::floor(phase);
      double rel_x, z;
      if (phase < p.duty_factor) {
        rel_x = 0.5 * stroke - stroke * phase / p.duty_factor;
        z = 0.0;
      } else {
        const double s = (phase - p.duty_factor) / (1.0 - p.duty_factor);
        rel_x = -0.5 * stroke + stroke * 0.5 * (1.0 - std::cos(M_PI * s));
        z = p.lift * std::sin(M_PI * s);
      }
      const Vec2 ankle(f.hip.x() + rel_x, z);
      const LegAngles a = ik_two_link(f.hip, ankle, l1, l2);
      f.knee[leg] = fk_knee(f.hip, a.hip, l1);
      f.ankle[leg] = fk_two_link(f.hip, a, l1, l2);
    }
  }
  track.validate();
  return track;
}

bool ankle_on_ground(const KeypointTrack& track, std::size_t i, int leg, double tol) {
  return track.frames.at(i).ankle[leg].y() <= tol;
}

}  // namespace amphim::motion
