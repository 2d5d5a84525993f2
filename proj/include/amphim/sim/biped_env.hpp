#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <utility>

#include "amphim/io/binary_io.hpp"
#include "amphim/sim/biped_dynamics.hpp"
#include "amphim/sim/observation.hpp"
#include "amphim/sim/rewards.hpp"
#include "amphim/sim/types.hpp"

namespace amphim::sim {

/// Thrown when integration produces non-finite state.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepResult {
  SimState state;
  ObservationFrame obs;
  RewardBreakdown reward;
  bool done = false;
  bool fell = false;
  bool timed_out = false;
};

struct ContactResult {
  Vec2 force = Vec2::Zero();  // (tangential, normal)
  bool in_contact = false;
  double anchor_x = 0.0;
  bool anchored = false;
};

/// Spring-damper normal force with a stiction spring capped by Coulomb friction.
ContactResult compute_contact(const Vec2& foot_pos, const Vec2& foot_vel, double ground_height, double anchor_x,
                              bool anchored, double friction, const SimConfig& cfg);

RandomizationDraw sample_randomization(const RandomizationRanges& ranges, std::mt19937_64& rng);

/// Nominal standing joint targets: split stance with both feet on the ground.
JointVector nominal_pose(const RobotMorphology& morph, const SimConfig& cfg);

class BipedEnv {
 public:
  BipedEnv(SimConfig cfg, RobotMorphology morph, RandomizationRanges ranges = {}, RewardWeights weights = {});

  /// Reseeds the environment RNG, then resets.
  std::pair<SimState, ObservationFrame> reset(std::uint64_t seed);
  /// Resets continuing the current RNG stream.
  std::pair<SimState, ObservationFrame> reset();

  /// Advances one control step with the given joint targets (rad).
  StepResult step(const JointVector& action);

  /// One physics sub-step with explicit joint torques (no PD, no delay).
  void physics_substep(const JointVector& torque);
  JointVector pd_torque(const JointVector& target) const;

  void set_command(const Command& cmd) { cmd_ = cmd; }
  const Command& command() const { return cmd_; }
  const SimState& state() const { return state_; }
  void set_state(const SimState& s) { state_ = s; }
  const RandomizationDraw& draw() const { return draw_; }
  const ObservationHistory& history() const { return history_; }
  const JointVector& active_target() const { return active_target_; }
  const JointVector& nominal() const { return nominal_; }
  const ActionHistory& actions() const { return actions_; }
  const BipedDynamics& dynamics() const { return dyn_; }
  const SimConfig& config() const { return cfg_; }
  SimConfig& mutable_config() { return cfg_; }
  const RobotMorphology& morphology() const { return morph_; }
  const RewardWeights& weights() const { return weights_; }
  std::int64_t step_count() const { return step_count_; }
  double ground_height(double x) const;
  double total_energy() const;
  std::mt19937_64& rng() { return rng_; }

  void save(io::BinaryWriter& w) const;
  void load(io::BinaryReader& r);

 private:
  void apply_draw();
  void refresh_feet();

  SimConfig cfg_;
  RobotMorphology morph_;
  RandomizationRanges ranges_;
  RewardWeights weights_;
  JointVector nominal_;

  std::mt19937_64 rng_;
  RandomizationDraw draw_;
  BipedDynamics dyn_;
  SimState state_;
  Command cmd_;
  ObservationHistory history_;
  ActionHistory actions_;
  JointVector active_target_;
  std::deque<std::pair<std::int64_t, JointVector>> pending_;  // (issue sub-step, target)
  std::int64_t delay_substeps_ = 0;
  std::int64_t substep_count_ = 0;
  std::int64_t step_count_ = 0;
};

}  // namespace amphim::sim
