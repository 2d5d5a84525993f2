#include "amphim/sim/biped_env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "amphim/motion/kinematics.hpp"

namespace amphim::sim {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void check_range(const Range& r, double lo_bound, double hi_bound, const char* name) {
  if (!(std::isfinite(r.lo) && std::isfinite(r.hi))) throw ConfigError(std::string(name) + ": non-finite range");
  if (r.lo > r.hi) throw ConfigError(std::string(name) + ": inverted range [" + std::to_string(r.lo) + ", " +
                                     std::to_string(r.hi) + "]");
  constexpr double eps = 1e-12;
  if (r.lo < lo_bound - eps || r.hi > hi_bound + eps) {
    std::ostringstream msg;
    msg << name << ": range [" << r.lo << ", " << r.hi << "] outside admissible [" << lo_bound << ", " << hi_bound
        << "]";
    throw ConfigError(msg.str());
  }
}

double draw_uniform(const Range& r, std::mt19937_64& rng) {
  if (r.lo == r.hi) return r.lo;
  std::uniform_real_distribution<double> u(r.lo, r.hi);
  return u(rng);
}

void write_state(io::BinaryWriter& w, const SimState& s) {
  w.f64(s.base_pos.x());
  w.f64(s.base_pos.y());
  w.f64(s.base_pitch);
  w.f64(s.base_lin_vel.x());
  w.f64(s.base_lin_vel.y());
  w.f64(s.base_pitch_rate);
  for (int j = 0; j < kNumJoints; ++j) w.f64(s.dof_pos[j]);
  for (int j = 0; j < kNumJoints; ++j) w.f64(s.dof_vel[j]);
  for (int f = 0; f < kNumFeet; ++f) {
    w.boolean(s.foot_contact[f]);
    w.f64(s.foot_contact_force[f]);
    w.f64(s.foot_force[f].x());
    w.f64(s.foot_force[f].y());
    w.f64(s.foot_pos[f].x());
    w.f64(s.foot_pos[f].y());
    w.f64(s.foot_vel[f].x());
    w.f64(s.foot_vel[f].y());
    w.f64(s.foot_anchor_x[f]);
    w.boolean(s.foot_anchored[f]);
  }
  w.f64(s.time);
}

SimState read_state(io::BinaryReader& r) {
  SimState s;
  s.base_pos.x() = r.f64();
  s.base_pos.y() = r.f64();
  s.base_pitch = r.f64();
  s.base_lin_vel.x() = r.f64();
  s.base_lin_vel.y() = r.f64();
  s.base_pitch_rate = r.f64();
  for (int j = 0; j < kNumJoints; ++j) s.dof_pos[j] = r.f64();
  for (int j = 0; j < kNumJoints; ++j) s.dof_vel[j] = r.f64();
  for (int f = 0; f < kNumFeet; ++f) {
    s.foot_contact[f] = r.boolean();
    s.foot_contact_force[f] = r.f64();
    s.foot_force[f].x() = r.f64();
    s.foot_force[f].y() = r.f64();
    s.foot_pos[f].x() = r.f64();
    s.foot_pos[f].y() = r.f64();
    s.foot_vel[f].x() = r.f64();
    s.foot_vel[f].y() = r.f64();
    s.foot_anchor_x[f] = r.f64();
    s.foot_anchored[f] = r.boolean();
  }
  s.time = r.f64();
  return s;
}

void write_joints(io::BinaryWriter& w, const JointVector& v) {
  for (int j = 0; j < kNumJoints; ++j) w.f64(v[j]);
}

JointVector read_joints(io::BinaryReader& r) {
  JointVector v;
  for (int j = 0; j < kNumJoints; ++j) v[j] = r.f64();
  return v;
}

}  // namespace

void RobotMorphology::validate() const {
  require(torso_mass > 0 && thigh_mass > 0 && shank_mass > 0, "morphology: masses must be positive");
  require(torso_length > 0 && thigh_length > 0 && shank_length > 0, "morphology: link lengths must be positive");
  require(num_dof == kNumJoints, "morphology: num_dof must be 4 for the planar biped");
  for (int j = 0; j < kNumJoints; ++j) {
    require(joint_lower[j] < joint_upper[j],
            std::string("morphology: joint limits inverted for ") + kJointNames[j]);
    require(pd_kp[j] >= 0 && pd_kd[j] >= 0, std::string("morphology: negative PD gain for ") + kJointNames[j]);
  }
  require(torque_limit > 0, "morphology: torque_limit must be positive");
}

bool SimState::all_finite() const {
  if (!base_pos.allFinite() || !std::isfinite(base_pitch) || !base_lin_vel.allFinite() ||
      !std::isfinite(base_pitch_rate) || !dof_pos.allFinite() || !dof_vel.allFinite() || !std::isfinite(time)) {
    return false;
  }
  for (int f = 0; f < kNumFeet; ++f) {
    if (!foot_force[f].allFinite() || !foot_pos[f].allFinite() || !foot_vel[f].allFinite()) return false;
  }
  return true;
}

RandomizationRanges RandomizationRanges::for_morphology(const RobotMorphology& morph) {
  RandomizationRanges r;
  const double m = 5.0 / 23.0 * morph.torso_mass;
  r.base_mass_delta = {-m, m};
  return r;
}

RandomizationRanges RandomizationRanges::nominal() {
  RandomizationRanges r;
  r.base_mass_delta = {0, 0};
  r.com_shift = {0, 0};
  r.friction = {1.0, 1.0};
  r.kp_factor = {1, 1};
  r.kd_factor = {1, 1};
  r.push_lin = {0, 0};
  r.push_ang = {0, 0};
  r.motor_strength = {1, 1};
  r.action_delay_ms = {0, 0};
  return r;
}

void RandomizationRanges::validate(const RobotMorphology& morph) const {
  const double m = 5.0 / 23.0 * morph.torso_mass;
  check_range(base_mass_delta, -m, m, "base_mass");
  check_range(com_shift, -0.02, 0.02, "com_shift");
  check_range(friction, 0.1, 2.0, "friction");
  check_range(kp_factor, 0.8, 1.2, "kp_factor");
  check_range(kd_factor, 0.8, 1.2, "kd_factor");
  check_range(push_lin, -0.6, 0.6, "push_lin");
  check_range(push_ang, -0.6, 0.6, "push_ang");
  check_range(motor_strength, 0.8, 1.2, "motor_strength");
  check_range(action_delay_ms, 0.0, 60.0, "action_delay");
}

void SimConfig::validate() const {
  require(physics_dt > 0 && decimation >= 1, "sim: physics_dt and decimation must be positive");
  require(ground_stiffness > 0 && ground_damping >= 0, "sim: ground contact constants must be positive");
  require(tangential_stiffness > 0 && tangential_damping >= 0, "sim: tangential contact constants invalid");
  require(history_length >= 1, "sim: history_length must be >= 1");
  require(noise.command >= 0 && noise.ang_vel >= 0 && noise.rot_xy >= 0 && noise.dof_pos >= 0 &&
              noise.dof_vel >= 0 && noise.action >= 0,
          "sim: noise levels must be non-negative");
  require(bumps.amplitude >= 0 && bumps.amplitude <= 0.03, "sim: bump amplitude must lie in [0, 0.03] m");
  require(bumps.wavelength > 0, "sim: bump wavelength must be positive");
  require(nominal_hip_height > 0, "sim: nominal_hip_height must be positive");
}

ContactResult compute_contact(const Vec2& foot_pos, const Vec2& foot_vel, double ground_height, double anchor_x,
                              bool anchored, double friction, const SimConfig& cfg) {
  ContactResult c;
  const double penetration = ground_height - foot_pos.y();
  if (penetration <= 0.0) return c;
  const double normal = std::max(0.0, cfg.ground_stiffness * penetration - cfg.ground_damping * foot_vel.y());
  c.anchored = true;
  c.anchor_x = anchored ? anchor_x : foot_pos.x();
  double tangential = -cfg.tangential_stiffness * (foot_pos.x() - c.anchor_x) - cfg.tangential_damping * foot_vel.x();
  const double cap = friction * normal;
  if (std::abs(tangential) > cap) {
    tangential = std::clamp(tangential, -cap, cap);
    // Slide the anchor so the spring force equals the friction cap.
    c.anchor_x = foot_pos.x() + (tangential + cfg.tangential_damping * foot_vel.x()) / cfg.tangential_stiffness;
  }
  c.force = {tangential, normal};
  c.in_contact = normal > 0.0;
  return c;
}

RandomizationDraw sample_randomization(const RandomizationRanges& ranges, std::mt19937_64& rng) {
  RandomizationDraw d;
  d.base_mass_delta = draw_uniform(ranges.base_mass_delta, rng);
  d.com_shift = draw_uniform(ranges.com_shift, rng);
  d.friction_coeff = draw_uniform(ranges.friction, rng);
  d.kp_factor = draw_uniform(ranges.kp_factor, rng);
  d.kd_factor = draw_uniform(ranges.kd_factor, rng);
  d.push_lin = draw_uniform(ranges.push_lin, rng);
  d.push_ang = draw_uniform(ranges.push_ang, rng);
  d.motor_strength_factor = draw_uniform(ranges.motor_strength, rng);
  d.action_delay_ms = draw_uniform(ranges.action_delay_ms, rng);
  return d;
}

JointVector nominal_pose(const RobotMorphology& morph, const SimConfig& cfg) {
  const motion::Vec2 hip(0.0, cfg.nominal_hip_height);
  const auto left = motion::ik_two_link(hip, {cfg.nominal_stance_half_width, 0.0}, morph.thigh_length,
                                        morph.shank_length);
  const auto right = motion::ik_two_link(hip, {-cfg.nominal_stance_half_width, 0.0}, morph.thigh_length,
                                         morph.shank_length);
  return {left.hip, left.knee, right.hip, right.knee};
}

BipedEnv::BipedEnv(SimConfig cfg, RobotMorphology morph, RandomizationRanges ranges, RewardWeights weights)
    : cfg_(cfg), morph_(morph), ranges_(ranges), weights_(weights), history_(cfg.history_length) {
  cfg_.validate();
  morph_.validate();
  ranges_.validate(morph_);
  nominal_ = nominal_pose(morph_, cfg_);
  dyn_ = BipedDynamics(morph_, 0.0, 0.0, cfg_.gravity);
  active_target_ = nominal_;
  actions_ = {nominal_, nominal_, nominal_};
}

double BipedEnv::ground_height(double x) const {
  if (!cfg_.bumps.enabled) return 0.0;
  return cfg_.bumps.amplitude * std::sin(2.0 * M_PI * x / cfg_.bumps.wavelength);
}

void BipedEnv::apply_draw() {
  dyn_ = BipedDynamics(morph_, draw_.base_mass_delta, draw_.com_shift, cfg_.gravity);
  delay_substeps_ = std::llround(draw_.action_delay_ms * 1e-3 / cfg_.physics_dt);
}

std::pair<SimState, ObservationFrame> BipedEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

std::pair<SimState, ObservationFrame> BipedEnv::reset() {
  draw_ = sample_randomization(ranges_, rng_);
  apply_draw();

  std::uniform_real_distribution<double> joint_noise(-cfg_.reset_joint_noise, cfg_.reset_joint_noise);
  std::uniform_real_distribution<double> vel_noise(-cfg_.reset_vel_noise, cfg_.reset_vel_noise);
  state_ = SimState{};
  for (int j = 0; j < kNumJoints; ++j) {
    state_.dof_pos[j] = std::clamp(nominal_[j] + joint_noise(rng_), morph_.joint_lower[j], morph_.joint_upper[j]);
  }
  state_.base_lin_vel.x() = vel_noise(rng_);
  state_.base_pos = {0.0, cfg_.nominal_hip_height};

  // Lower the robot until the lowest foot touches the ground.
  Coords q = coords_of(state_);
  FootKinematics k = dyn_.feet(q, Coords::Zero());
  double clearance = 1e9;
  for (int f = 0; f < kNumFeet; ++f) clearance = std::min(clearance, k.foot[f].y() - ground_height(k.foot[f].x()));
  state_.base_pos.y() -= clearance;
  refresh_feet();

  pending_.clear();
  active_target_ = nominal_;
  actions_ = {nominal_, nominal_, nominal_};
  substep_count_ = 0;
  step_count_ = 0;

  ObservationFrame obs = observe(state_, cmd_, nominal_, cfg_.noise, rng_);
  history_ = ObservationHistory(cfg_.history_length);
  history_.fill(obs);
  return {state_, obs};
}

void BipedEnv::refresh_feet() {
  const FootKinematics k = dyn_.feet(coords_of(state_), velocities_of(state_));
  for (int f = 0; f < kNumFeet; ++f) {
    state_.foot_pos[f] = k.foot[f];
    state_.foot_vel[f] = k.foot_vel[f];
  }
}

JointVector BipedEnv::pd_torque(const JointVector& target) const {
  JointVector tau = draw_.kp_factor * morph_.pd_kp.cwiseProduct(target - state_.dof_pos) -
                    draw_.kd_factor * morph_.pd_kd.cwiseProduct(state_.dof_vel);
  const double limit = draw_.motor_strength_factor * morph_.torque_limit;
  return tau.cwiseMax(-limit).cwiseMin(limit);
}

void BipedEnv::physics_substep(const JointVector& torque) {
  Coords q = coords_of(state_);
  Coords qd = velocities_of(state_);
  const FootKinematics k = dyn_.feet(q, qd);

  MassMatrix mass;
  Coords force;
  dyn_.equations(q, qd, mass, force);
  force.tail<4>() += torque;
  for (int f = 0; f < kNumFeet; ++f) {
    const ContactResult c = compute_contact(k.foot[f], k.foot_vel[f], ground_height(k.foot[f].x()),
                                            state_.foot_anchor_x[f], state_.foot_anchored[f], draw_.friction_coeff,
                                            cfg_);
    state_.foot_contact[f] = c.in_contact;
    state_.foot_contact_force[f] = c.force.y();
    state_.foot_force[f] = c.force;
    state_.foot_anchor_x[f] = c.anchor_x;
    state_.foot_anchored[f] = c.anchored;
    state_.foot_pos[f] = k.foot[f];
    state_.foot_vel[f] = k.foot_vel[f];
    if (c.anchored) force.noalias() += k.foot_jacobian[f].transpose() * c.force;
  }

  const Coords qdd = mass.llt().solve(force);
  qd += cfg_.physics_dt * qdd;
  q += cfg_.physics_dt * qd;
  set_coords(state_, q, qd);
  ++substep_count_;
  state_.time = static_cast<double>(substep_count_) * cfg_.physics_dt;
}

StepResult BipedEnv::step(const JointVector& action) {
  if (!action.allFinite()) throw std::invalid_argument("step: non-finite action");
  const JointVector target = action.cwiseMax(morph_.joint_lower).cwiseMin(morph_.joint_upper);
  pending_.emplace_back(substep_count_, target);

  const SimState prev = state_;
  for (int i = 0; i < cfg_.decimation; ++i) {
    while (!pending_.empty() && pending_.front().first + delay_substeps_ <= substep_count_) {
      active_target_ = pending_.front().second;
      pending_.pop_front();
    }
    physics_substep(pd_torque(active_target_));
  }
  if (!state_.all_finite()) throw SimulationFault("simulation produced non-finite state");
  ++step_count_;

  if (cfg_.push_interval > 0.0) {
    const auto every = std::max<std::int64_t>(1, std::llround(cfg_.push_interval / cfg_.control_dt()));
    if (step_count_ % every == 0) {
      draw_.push_lin = draw_uniform(ranges_.push_lin, rng_);
      draw_.push_ang = draw_uniform(ranges_.push_ang, rng_);
      state_ = apply_push(state_, draw_.push_lin, draw_.push_ang);
    }
  }

  actions_ = {target, actions_[0], actions_[1]};
  StepResult out;
  RewardContext ctx;
  ctx.control_dt = cfg_.control_dt();
  ctx.max_contact_force = cfg_.max_contact_force_factor * dyn_.total_mass() * cfg_.gravity;
  out.reward = task_rewards(state_, prev, cmd_, actions_, weights_, ctx);

  out.fell = state_.base_pos.y() - ground_height(state_.base_pos.x()) < cfg_.fall_height ||
             std::abs(state_.base_pitch) > cfg_.fall_pitch;
  out.timed_out = cfg_.episode_timeout > 0.0 && state_.time >= cfg_.episode_timeout - 1e-9;
  out.done = (out.fell && cfg_.terminate_on_fall) || out.timed_out;

  out.obs = observe(state_, cmd_, target, cfg_.noise, rng_);
  history_.push(out.obs);
  out.state = state_;
  return out;
}

double BipedEnv::total_energy() const {
  const Coords q = coords_of(state_);
  return dyn_.kinetic_energy(q, velocities_of(state_)) + dyn_.potential_energy(q);
}

void BipedEnv::save(io::BinaryWriter& w) const {
  w.magic("BENV");
  std::ostringstream rng_text;
  rng_text << rng_;
  w.str(rng_text.str());
  const RandomizationDraw& d = draw_;
  for (double v : {d.base_mass_delta, d.com_shift, d.friction_coeff, d.kp_factor, d.kd_factor, d.push_lin,
                   d.push_ang, d.motor_strength_factor, d.action_delay_ms}) {
    w.f64(v);
  }
  write_state(w, state_);
  w.f64(cmd_.lin_vel_x);
  w.f64(cmd_.lin_vel_y);
  w.f64(cmd_.yaw_rate);
  w.u64(history_.frames().size());
  for (const auto& f : history_.frames()) w.vec(f.values);
  for (const auto& a : actions_) write_joints(w, a);
  write_joints(w, active_target_);
  w.u64(pending_.size());
  for (const auto& [t, a] : pending_) {
    w.i64(t);
    write_joints(w, a);
  }
  w.i64(substep_count_);
  w.i64(step_count_);
}

void BipedEnv::load(io::BinaryReader& r) {
  r.expect_magic("BENV");
  std::istringstream rng_text(r.str());
  rng_text >> rng_;
  RandomizationDraw& d = draw_;
  for (double* v : {&d.base_mass_delta, &d.com_shift, &d.friction_coeff, &d.kp_factor, &d.kd_factor, &d.push_lin,
                    &d.push_ang, &d.motor_strength_factor, &d.action_delay_ms}) {
    *v = r.f64();
  }
  apply_draw();
  state_ = read_state(r);
  cmd_.lin_vel_x = r.f64();
  cmd_.lin_vel_y = r.f64();
  cmd_.yaw_rate = r.f64();
  history_ = ObservationHistory(cfg_.history_length);
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) history_.push(ObservationFrame{r.vec()});
  for (auto& a : actions_) a = read_joints(r);
  active_target_ = read_joints(r);
  pending_.clear();
  const std::uint64_t np = r.u64();
  for (std::uint64_t i = 0; i < np; ++i) {
    const std::int64_t t = r.i64();
    pending_.emplace_back(t, read_joints(r));
  }
  substep_count_ = r.i64();
  step_count_ = r.i64();
}

}  // namespace amphim::sim
