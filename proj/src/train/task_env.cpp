#include "amphim/train/task_env.hpp"

#include <cmath>
#include <sstream>

#include "amphim/curiosity/hashing.hpp"
#include "amphim/motion/clip.hpp"

namespace amphim::train {

namespace {

sim::SimConfig sim_config(const TrainConfig& cfg) {
  sim::SimConfig s;
  s.episode_timeout = cfg.episode_timeout;
  s.history_length = cfg.history_length;
  s.push_interval = cfg.randomize ? cfg.push_interval : 0.0;
  return s;
}

void write_rng(io::BinaryWriter& w, const std::mt19937_64& rng) {
  std::ostringstream text;
  text << rng;
  w.str(text.str());
}

void read_rng(io::BinaryReader& r, std::mt19937_64& rng) {
  std::istringstream text(r.str());
  text >> rng;
  if (!text) throw io::FormatError("corrupt RNG state");
}

}  // namespace

BipedTaskEnv::BipedTaskEnv(const TrainConfig& cfg)
    : env_(sim_config(cfg), sim::RobotMorphology{}, cfg.randomize ? cfg.ranges : sim::RandomizationRanges::nominal(),
           cfg.weights),
      cmd_range_(cfg.command.lin_vel_x) {
  resample_every_ = std::max<std::int64_t>(1, std::llround(cfg.command.resample_time / env_.config().control_dt()));
}

void BipedTaskEnv::sample_command() {
  since_resample_ = 0;
  if (held_) return;
  std::uniform_real_distribution<double> d(cmd_range_.lo, cmd_range_.hi);
  env_.set_command({d(cmd_rng_), 0.0, 0.0});
}

void BipedTaskEnv::restart() {
  sample_command();
  env_.reset();
}

Eigen::VectorXd BipedTaskEnv::reset(std::uint64_t seed) {
  cmd_rng_.seed(seed ^ 0x9e3779b97f4a7c15ULL);
  env_.rng().seed(seed);
  restart();
  return observation();
}

void BipedTaskEnv::hold_command(double v) {
  held_ = true;
  env_.set_command({v, 0.0, 0.0});
}

Eigen::VectorXd BipedTaskEnv::observation() const { return env_.history().latest().values; }

Eigen::Vector3d BipedTaskEnv::true_velocity() const {
  const auto& v = env_.state().base_lin_vel;
  return {v.x(), 0.0, v.y()};
}

Eigen::VectorXd BipedTaskEnv::style_features() const { return motion::style_features(env_.state()); }

Eigen::VectorXd BipedTaskEnv::curiosity_features() const { return curiosity::curiosity_features(env_.state()); }

EnvStep BipedTaskEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != sim::kNumJoints) throw std::invalid_argument("BipedTaskEnv: action dimension mismatch");
  EnvStep out;
  const sim::JointVector target = env_.nominal() + kActionScale * sim::JointVector(action);
  try {
    const sim::StepResult r = env_.step(target);
    for (std::size_t i = 0; i < out.raw.size(); ++i) out.raw[i] = r.reward.terms[i].raw;
    out.task_reward = r.reward.total;
    out.done = r.done;
    out.timed_out = r.timed_out;
    out.fell = r.fell;
  } catch (const sim::SimulationFault&) {
    out.faulted = true;
    out.done = true;
  }
  if (out.faulted) {
    // The state is unusable; the transition is reported from the reset state.
    restart();
  }
  out.next_history = history();
  out.next_style = style_features();
  out.next_curiosity = curiosity_features();
  if (out.done && !out.faulted) {
    restart();
  } else if (!out.faulted && ++since_resample_ >= resample_every_) {
    sample_command();
  }
  out.obs = observation();
  // A resampled command is visible immediately.
  out.obs[sim::ObsLayout::kCommand] = command();
  return out;
}

void BipedTaskEnv::save(io::BinaryWriter& w) const {
  w.magic("BTSK");
  env_.save(w);
  write_rng(w, cmd_rng_);
  w.i64(since_resample_);
  w.boolean(held_);
}

void BipedTaskEnv::load(io::BinaryReader& r) {
  r.expect_magic("BTSK");
  env_.load(r);
  read_rng(r, cmd_rng_);
  since_resample_ = r.i64();
  held_ = r.boolean();
}

PointMassEnv::PointMassEnv(const TrainConfig& cfg)
    : cfg_(cfg.point_mass), cmd_range_{-1.0, 1.0}, weights_(cfg.weights) {}

void PointMassEnv::restart() {
  t_ = 0;
  std::uniform_real_distribution<double> d(cmd_range_.lo, cmd_range_.hi);
  v_ = d(rng_);
  if (!held_) cmd_ = d(rng_);
}

Eigen::VectorXd PointMassEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  restart();
  return observation();
}

EnvStep PointMassEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != 1) throw std::invalid_argument("PointMassEnv: action dimension mismatch");
  if (!std::isfinite(action[0])) throw std::invalid_argument("PointMassEnv: non-finite action");
  EnvStep out;
  const double a = std::clamp(action[0], -3.0, 3.0);
  v_ += cfg_.alpha * (a - v_);
  ++t_;
  const double e = cmd_ - v_;
  out.raw[2] = std::exp(-4.0 * e * e);
  out.task_reward = weights_.lin_vel_tracking * out.raw[2];
  out.timed_out = t_ >= cfg_.episode_length;
  out.done = out.timed_out;
  out.next_history = history();
  out.next_curiosity = curiosity_features();
  if (out.done) {
    restart();
  } else if (t_ % cfg_.resample_steps == 0 && !held_) {
    cmd_ = std::uniform_real_distribution<double>(cmd_range_.lo, cmd_range_.hi)(rng_);
  }
  out.obs = observation();
  return out;
}

void PointMassEnv::save(io::BinaryWriter& w) const {
  w.magic("PMAS");
  write_rng(w, rng_);
  w.f64(v_);
  w.f64(cmd_);
  w.i64(t_);
  w.boolean(held_);
}

void PointMassEnv::load(io::BinaryReader& r) {
  r.expect_magic("PMAS");
  read_rng(r, rng_);
  v_ = r.f64();
  cmd_ = r.f64();
  t_ = static_cast<int>(r.i64());
  held_ = r.boolean();
}

std::unique_ptr<TaskEnv> make_env(const TrainConfig& cfg) {
  if (cfg.env == EnvKind::point_mass) return std::make_unique<PointMassEnv>(cfg);
  return std::make_unique<BipedTaskEnv>(cfg);
}

}  // namespace amphim::train
