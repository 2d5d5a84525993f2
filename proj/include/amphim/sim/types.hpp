#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace amphim::sim {

using Vec2 = Eigen::Vector2d;
using JointVector = Eigen::Vector4d;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Actuated joint order used everywhere (clips, actions, observations).
enum Joint : int { kHipLeft = 0, kKneeLeft = 1, kHipRight = 2, kKneeRight = 3 };
inline constexpr int kNumJoints = 4;
inline constexpr int kNumFeet = 2;
inline constexpr std::array<const char*, kNumJoints> kJointNames = {"hip_l", "knee_l", "hip_r", "knee_r"};

/// Planar five-link biped: torso, two thighs, two shanks, point feet.
/// Link angles are measured about the lateral axis; positive pitch leans the
/// torso forward and positive knee angles are flexion.
struct RobotMorphology {
  double torso_mass = 6.0;    // kg
  double torso_length = 0.18;  // m, hip joint to top
  double thigh_length = 0.225;
  double shank_length = 0.225;
  double thigh_mass = 1.0;
  double shank_mass = 1.0;
  int num_dof = kNumJoints;
  JointVector joint_lower{-1.6, -0.1, -1.6, -0.1};
  JointVector joint_upper{1.6, 2.6, 1.6, 2.6};
  JointVector pd_kp{40.0, 40.0, 40.0, 40.0};  // N*m/rad
  JointVector pd_kd{1.0, 1.0, 1.0, 1.0};      // N*m*s/rad
  double torque_limit = 30.0;                 // N*m

  double leg_length() const { return thigh_length + shank_length; }
  double total_mass() const { return torso_mass + 2.0 * (thigh_mass + shank_mass); }

  /// Throws ConfigError on non-positive masses/lengths or inverted limits.
  void validate() const;
};

struct SimState {
  Vec2 base_pos = Vec2::Zero();  // hip joint (x, z); z is the base height
  double base_pitch = 0.0;
  Vec2 base_lin_vel = Vec2::Zero();
  double base_pitch_rate = 0.0;
  JointVector dof_pos = JointVector::Zero();
  JointVector dof_vel = JointVector::Zero();
  std::array<bool, kNumFeet> foot_contact{false, false};
  std::array<double, kNumFeet> foot_contact_force{0.0, 0.0};  // normal component, N
  std::array<Vec2, kNumFeet> foot_force{Vec2::Zero(), Vec2::Zero()};  // (tangential, normal)
  std::array<Vec2, kNumFeet> foot_pos{Vec2::Zero(), Vec2::Zero()};
  std::array<Vec2, kNumFeet> foot_vel{Vec2::Zero(), Vec2::Zero()};
  std::array<double, kNumFeet> foot_anchor_x{0.0, 0.0};  // stiction anchor while in contact
  std::array<bool, kNumFeet> foot_anchored{false, false};
  double time = 0.0;

  bool all_finite() const;
};

struct Command {
  double lin_vel_x = 0.0;
  double lin_vel_y = 0.0;  // fixed 0 in planar mode
  double yaw_rate = 0.0;   // fixed 0 in planar mode
};

/// Partial-observation layout: command(3), base angular velocity(3),
/// base rotation xy(2), dof position, dof velocity, last action.
struct ObsLayout {
  int num_dof = kNumJoints;

  static constexpr int kCommand = 0;
  static constexpr int kAngVel = 3;
  static constexpr int kRotXY = 6;
  int dof_pos() const { return 8; }
  int dof_vel() const { return 8 + num_dof; }
  int last_action() const { return 8 + 2 * num_dof; }
  int dim() const { return 8 + 3 * num_dof; }
};

struct ObservationFrame {
  Eigen::VectorXd values;
};

/// Uniform noise half-widths per observation block.
struct NoiseLevels {
  double command = 0.0;
  double ang_vel = 0.3;
  double rot_xy = 0.09;
  double dof_pos = 0.075;
  double dof_vel = 2.25;
  double action = 0.0;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sampling ranges for the per-episode physical perturbations.
struct RandomizationRanges {
  Range base_mass_delta{-5.0 / 23.0 * 6.0, 5.0 / 23.0 * 6.0};  // kg, scaled to torso mass
  Range com_shift{-0.02, 0.02};
  Range friction{0.1, 2.0};
  Range kp_factor{0.8, 1.2};
  Range kd_factor{0.8, 1.2};
  Range push_lin{-0.6, 0.6};
  Range push_ang{-0.6, 0.6};
  Range motor_strength{0.8, 1.2};
  Range action_delay_ms{0.0, 60.0};

  /// Every range ordered and inside its admissible bounds; names the offending parameter.
  void validate(const RobotMorphology& morph) const;
  static RandomizationRanges for_morphology(const RobotMorphology& morph);
  static RandomizationRanges nominal();  // all ranges collapsed to the unperturbed point
};

struct RandomizationDraw {
  double base_mass_delta = 0.0;
  double com_shift = 0.0;
  double friction_coeff = 1.0;
  double kp_factor = 1.0;
  double kd_factor = 1.0;
  double push_lin = 0.0;
  double push_ang = 0.0;
  double motor_strength_factor = 1.0;
  double action_delay_ms = 0.0;
};

/// Task reward scales, in the fixed term order used by RewardBreakdown.
struct RewardWeights {
  double feet_slip = -0.05;
  double contact_forces = -0.01;
  double lin_vel_tracking = 2.4;
  double ang_vel_tracking = 1.1;
  double root_accel = 0.2;
  double smoothness = -0.01;

  std::array<double, 6> as_array() const {
    return {feet_slip, contact_forces, lin_vel_tracking, ang_vel_tracking, root_accel, smoothness};
  }
};

inline constexpr std::array<const char*, 6> kRewardTermNames = {
    "feet_slip", "contact_forces", "lin_vel_tracking", "ang_vel_tracking", "root_accel", "smoothness"};

struct RewardTerm {
  const char* name = "";
  double raw = 0.0;
  double weight = 0.0;
  double weighted = 0.0;
};

struct RewardBreakdown {
  std::array<RewardTerm, 6> terms;
  double total = 0.0;

  const RewardTerm& term(const std::string& name) const;
};

struct BumpProfile {
  bool enabled = false;
  double amplitude = 0.02;  // m, at most 0.03
  double wavelength = 0.6;  // m
};

struct SimConfig {
  double physics_dt = 0.001;
  int decimation = 20;
  double gravity = 9.81;
  double ground_stiffness = 2e4;   // N/m
  double ground_damping = 200.0;   // N*s/m
  double tangential_stiffness = 5e3;
  double tangential_damping = 100.0;
  int history_length = 6;
  NoiseLevels noise;
  double fall_height = 0.3;
  double fall_pitch = 1.0;
  double episode_timeout = 20.0;   // s; <= 0 disables
  bool terminate_on_fall = true;
  double push_interval = 8.0;      // s; <= 0 disables pushes
  double max_contact_force_factor = 1.5;  // F_max as a multiple of body weight
  double nominal_hip_height = 0.42;
  double nominal_stance_half_width = 0.08;
  double reset_joint_noise = 0.05;
  double reset_vel_noise = 0.05;
  BumpProfile bumps;

  double control_dt() const { return physics_dt * decimation; }
  void validate() const;
};

}  // namespace amphim::sim
