#include "amphim/sim/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace amphim::sim {

std::array<double, 6> raw_task_terms(const SimState& state, const SimState& prev, const Command& cmd,
                                     const ActionHistory& actions, const RewardContext& ctx) {
  std::array<double, 6> raw{};

  // Tangential foot speed while in contact.
  double slip = 0.0;
  for (int f = 0; f < kNumFeet; ++f) {
    if (state.foot_contact[f]) slip += std::abs(state.foot_vel[f].x());
  }
  raw[0] = slip;

  double excess = 0.0;
  for (int f = 0; f < kNumFeet; ++f) excess += std::max(0.0, state.foot_force[f].norm() - ctx.max_contact_force);
  raw[1] = excess;

  // Planar robot: lateral velocity and yaw rate are identically zero.
  const double ex = cmd.lin_vel_x - state.base_lin_vel.x();
  const double ey = cmd.lin_vel_y;
  raw[2] = std::exp(-4.0 * (ex * ex + ey * ey));
  const double eyaw = cmd.yaw_rate;
  raw[3] = std::exp(-4.0 * eyaw * eyaw);

  const double accel = ((state.base_lin_vel - prev.base_lin_vel) / ctx.control_dt).norm();
  raw[4] = std::exp(-accel * accel * accel);

  raw[5] = (actions[0] - 2.0 * actions[1] + actions[2]).squaredNorm();
  return raw;
}

RewardBreakdown weigh(const std::array<double, 6>& raw, const RewardWeights& weights) {
  RewardBreakdown out;
  const auto w = weights.as_array();
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.terms[i] = {kRewardTermNames[i], raw[i], w[i], w[i] * raw[i]};
    total += out.terms[i].weighted;
  }
  out.total = total;
  return out;
}

RewardBreakdown task_rewards(const SimState& state, const SimState& prev, const Command& cmd,
                             const ActionHistory& actions, const RewardWeights& weights, const RewardContext& ctx) {
  return weigh(raw_task_terms(state, prev, cmd, actions, ctx), weights);
}

const RewardTerm& RewardBreakdown::term(const std::string& name) const {
  for (const auto& t : terms) {
    if (name == t.name) return t;
  }
  throw std::out_of_range("unknown reward term '" + name + "'");
}

}  // namespace amphim::sim
