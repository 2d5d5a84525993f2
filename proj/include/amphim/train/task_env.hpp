#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <random>

#include "amphim/io/binary_io.hpp"
#include "amphim/sim/biped_env.hpp"
#include "amphim/train/config.hpp"

namespace amphim::train {

/// One control step. Transition fields describe the post-step state before any
/// automatic reset; `obs` is the observation the policy sees next.
struct EnvStep {
  Eigen::VectorXd obs;
  std::array<double, 6> raw{};
  double task_reward = 0.0;
  bool done = false;
  bool timed_out = false;
  bool fell = false;
  bool faulted = false;
  Eigen::VectorXd next_history;
  Eigen::VectorXd next_style;
  Eigen::VectorXd next_curiosity;
};

/// Environment contract used by the trainer and the evaluators.
class TaskEnv {
 public:
  virtual ~TaskEnv() = default;

  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int privileged_dim() const = 0;
  virtual int history_length() const = 0;
  virtual bool has_style() const = 0;

  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  /// Steps, then resets automatically when the episode ends.
  virtual EnvStep step(const Eigen::VectorXd& action) = 0;

  virtual Eigen::VectorXd observation() const = 0;
  /// Flattened observation history, oldest first.
  virtual Eigen::VectorXd history() const = 0;
  virtual Eigen::VectorXd privileged() const = 0;
  virtual Eigen::Vector3d true_velocity() const = 0;
  virtual Eigen::VectorXd style_features() const = 0;
  virtual Eigen::VectorXd curiosity_features() const = 0;

  virtual double command() const = 0;
  /// Fixes the command and stops resampling until release_command().
  virtual void hold_command(double v) = 0;
  virtual void release_command() = 0;

  virtual void save(io::BinaryWriter& w) const = 0;
  virtual void load(io::BinaryReader& r) = 0;
};

/// Planar biped with resampled forward-velocity commands. Actions are joint
/// offsets from the nominal pose, scaled by kActionScale.
class BipedTaskEnv : public TaskEnv {
 public:
  static constexpr double kActionScale = 0.5;

  explicit BipedTaskEnv(const TrainConfig& cfg);

  int obs_dim() const override { return sim::ObsLayout{}.dim(); }
  int action_dim() const override { return sim::kNumJoints; }
  int privileged_dim() const override { return sim::kHiddenDim; }
  int history_length() const override { return env_.config().history_length; }
  bool has_style() const override { return true; }

  Eigen::VectorXd reset(std::uint64_t seed) override;
  EnvStep step(const Eigen::VectorXd& action) override;

  Eigen::VectorXd observation() const override;
  Eigen::VectorXd history() const override { return env_.history().flatten(); }
  Eigen::VectorXd privileged() const override { return sim::hidden_state(env_.state()); }
  Eigen::Vector3d true_velocity() const override;
  Eigen::VectorXd style_features() const override;
  Eigen::VectorXd curiosity_features() const override;

  double command() const override { return env_.command().lin_vel_x; }
  void hold_command(double v) override;
  void release_command() override { held_ = false; }

  void save(io::BinaryWriter& w) const override;
  void load(io::BinaryReader& r) override;

  sim::BipedEnv& env() { return env_; }
  const sim::BipedEnv& env() const { return env_; }

 private:
  void restart();
  void sample_command();

  sim::BipedEnv env_;
  sim::Range cmd_range_;
  std::int64_t resample_every_ = 1;
  std::int64_t since_resample_ = 0;
  bool held_ = false;
  std::mt19937_64 cmd_rng_;
};

/// First-order velocity tracker: v <- v + alpha (a - v). Observation [cmd, v].
class PointMassEnv : public TaskEnv {
 public:
  explicit PointMassEnv(const TrainConfig& cfg);

  int obs_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  int privileged_dim() const override { return 1; }
  int history_length() const override { return 1; }
  bool has_style() const override { return false; }

  Eigen::VectorXd reset(std::uint64_t seed) override;
  EnvStep step(const Eigen::VectorXd& action) override;

  Eigen::VectorXd observation() const override { return Eigen::Vector2d(cmd_, v_); }
  Eigen::VectorXd history() const override { return observation(); }
  Eigen::VectorXd privileged() const override { return Eigen::VectorXd::Constant(1, v_); }
  Eigen::Vector3d true_velocity() const override { return {v_, 0.0, 0.0}; }
  Eigen::VectorXd style_features() const override { return {}; }
  Eigen::VectorXd curiosity_features() const override { return Eigen::Vector2d(v_, cmd_ - v_); }

  double command() const override { return cmd_; }
  void hold_command(double v) override {
    cmd_ = v;
    held_ = true;
  }
  void release_command() override { held_ = false; }

  void save(io::BinaryWriter& w) const override;
  void load(io::BinaryReader& r) override;

  double velocity() const { return v_; }

 private:
  void restart();

  PointMassConfig cfg_;
  sim::Range cmd_range_;
  sim::RewardWeights weights_;
  double v_ = 0.0;
  double cmd_ = 0.0;
  int t_ = 0;
  bool held_ = false;
  std::mt19937_64 rng_;
};

std::unique_ptr<TaskEnv> make_env(const TrainConfig& cfg);

}  // namespace amphim::train
