#include "amphim/sim/observation.hpp"

#include <stdexcept>

namespace amphim::sim {

ObservationFrame project(const SimState& state, const Command& cmd, const JointVector& last_action) {
  const ObsLayout layout;
  ObservationFrame f;
  f.values = Eigen::VectorXd::Zero(layout.dim());
  auto& v = f.values;
  v[ObsLayout::kCommand + 0] = cmd.lin_vel_x;
  v[ObsLayout::kCommand + 1] = cmd.lin_vel_y;
  v[ObsLayout::kCommand + 2] = cmd.yaw_rate;
  v[ObsLayout::kAngVel + 1] = state.base_pitch_rate;
  v[ObsLayout::kRotXY + 1] = state.base_pitch;
  v.segment(layout.dof_pos(), kNumJoints) = state.dof_pos;
  v.segment(layout.dof_vel(), kNumJoints) = state.dof_vel;
  v.segment(layout.last_action(), kNumJoints) = last_action;
  return f;
}

ObservationFrame observe(const SimState& state, const Command& cmd, const JointVector& last_action,
                         const NoiseLevels& noise, std::mt19937_64& rng) {
  ObservationFrame f = project(state, cmd, last_action);
  const ObsLayout layout;
  auto add = [&](int start, int count, double level) {
    if (level <= 0.0) return;
    std::uniform_real_distribution<double> u(-level, level);
    for (int i = 0; i < count; ++i) f.values[start + i] += u(rng);
  };
  add(ObsLayout::kCommand, 3, noise.command);
  add(ObsLayout::kAngVel, 3, noise.ang_vel);
  add(ObsLayout::kRotXY, 2, noise.rot_xy);
  add(layout.dof_pos(), kNumJoints, noise.dof_pos);
  add(layout.dof_vel(), kNumJoints, noise.dof_vel);
  add(layout.last_action(), kNumJoints, noise.action);
  return f;
}

Eigen::VectorXd hidden_state(const SimState& state) {
  Eigen::VectorXd h(kHiddenDim);
  h << state.dof_pos, state.dof_vel, state.base_lin_vel.x(), 0.0, state.base_lin_vel.y(), 0.0,
      state.base_pitch_rate, 0.0, state.base_pos.y();
  return h;
}

SimState apply_push(SimState state, double push_lin, double push_ang) {
  state.base_lin_vel.x() += push_lin;
  state.base_pitch_rate += push_ang;
  return state;
}

void ObservationHistory::fill(const ObservationFrame& frame) {
  frames_.assign(static_cast<std::size_t>(length_), frame);
}

void ObservationHistory::push(const ObservationFrame& frame) {
  if (frames_.empty()) {
    fill(frame);
    return;
  }
  frames_.push_back(frame);
  while (static_cast<int>(frames_.size()) > length_) frames_.pop_front();
}

Eigen::VectorXd ObservationHistory::flatten() const {
  if (frames_.empty()) throw std::logic_error("observation history is empty");
  const Eigen::Index d = frames_.front().values.size();
  Eigen::VectorXd out(d * static_cast<Eigen::Index>(frames_.size()));
  Eigen::Index off = 0;
  for (const auto& f : frames_) {
    out.segment(off, d) = f.values;
    off += d;
  }
  return out;
}

}  // namespace amphim::sim
