#pragma once

#include <array>

#include "amphim/sim/types.hpp"

namespace amphim::sim {

/// Most recent first: a_t, a_{t-1}, a_{t-2}.
using ActionHistory = std::array<JointVector, 3>;

struct RewardContext {
  double control_dt = 0.02;
  double max_contact_force = 1.5 * 10.0 * 9.81;  // N
};

/// Raw task terms in kRewardTermNames order.
std::array<double, 6> raw_task_terms(const SimState& state, const SimState& prev, const Command& cmd,
                                     const ActionHistory& actions, const RewardContext& ctx);

/// Weights raw terms; total is the plain left-to-right sum of weighted terms.
RewardBreakdown weigh(const std::array<double, 6>& raw, const RewardWeights& weights);

RewardBreakdown task_rewards(const SimState& state, const SimState& prev, const Command& cmd,
                             const ActionHistory& actions, const RewardWeights& weights, const RewardContext& ctx);

}  // namespace amphim::sim
