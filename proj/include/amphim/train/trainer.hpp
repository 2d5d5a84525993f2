#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "amphim/adversary/losses.hpp"
#include "amphim/cli/metrics.hpp"
#include "amphim/curiosity/hashing.hpp"
#include "amphim/him/estimator.hpp"
#include "amphim/motion/dataset.hpp"
#include "amphim/nn/normalizer.hpp"
#include "amphim/train/config.hpp"
#include "amphim/train/ppo.hpp"
#include "amphim/train/task_env.hpp"

namespace amphim::train {

/// Time-major rollout storage: column t * num_envs + e.
struct RolloutBatch {
  int num_envs = 0;
  int horizon = 0;

  Matrix obs;        // raw observations the policy acted on
  Matrix privileged; // raw privileged state
  Matrix policy_in;  // normalised observation, plus [v_hat; z] with the estimator
  Matrix critic_in;  // normalised observation and privileged state
  Matrix actions;
  Vector log_prob;
  Vector values;

  Matrix raw_terms;  // 6 x N, task terms in RewardBreakdown order
  Vector task_reward;
  Vector style_reward;
  Vector curiosity_reward;
  Vector total_reward;
  Vector command;
  std::vector<char> done, timed_out, fell, faulted;

  Matrix history;       // estimator input at step t
  Matrix next_history;  // estimator input after the step (before any reset)
  Matrix velocity;      // true base velocity at step t
  Matrix style_pairs;   // 2 * kStyleDim x N, normalised

  Vector last_values;
  std::vector<double> episode_returns;  // task returns of episodes finished in this rollout

  Eigen::Index size() const { return actions.cols(); }
};

/// Policy plus everything needed to rebuild its input from an environment.
struct PolicySnapshot {
  ActorCritic ac;
  nn::RunningNormalizer obs_norm;
  std::optional<him::HimEstimator> him;

  Vector policy_input(const Vector& obs, const Vector& history) const;
  Matrix policy_inputs(const Matrix& obs, const Matrix& histories) const;
  Matrix normalized_histories(const Matrix& histories) const;
};

struct DiscStats {
  double loss = 0.0;
  double real_mean = 0.0;
  double fake_mean = 0.0;
  double penalty = 0.0;
};

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);

  /// T steps per environment against the current parameters.
  RolloutBatch collect(bool stochastic = true);
  /// One full iteration: rollout, then PPO, estimator and discriminator updates.
  cli::MetricsRow iterate();

  static std::vector<std::string> metric_columns();

  void save_checkpoint(const std::string& path) const;
  /// Restores a checkpoint written with the same config (iterations and workers may differ).
  void load_checkpoint(const std::string& path);

  const TrainConfig& config() const { return cfg_; }
  std::int64_t iteration() const { return iteration_; }
  std::int64_t env_steps() const { return env_steps_; }
  PolicySnapshot snapshot() const;
  const ActorCritic& actor_critic() const { return ac_; }
  const nn::RunningNormalizer& obs_normalizer() const { return obs_norm_; }
  const std::optional<him::HimEstimator>& estimator() const { return him_; }
  const std::optional<adversary::Discriminator>& discriminator() const { return disc_; }
  const std::optional<curiosity::CuriosityModule>& curiosity() const { return curiosity_; }
  TaskEnv& env(int i) { return *envs_[static_cast<std::size_t>(i)]; }
  int num_envs() const { return static_cast<int>(envs_.size()); }
  const RolloutBatch& last_batch() const { return last_; }

 private:
  Vector critic_input(const Vector& obs, const Vector& privileged) const;
  DiscStats update_discriminator(const RolloutBatch& b);
  int threads() const;

  TrainConfig cfg_;
  std::vector<std::unique_ptr<TaskEnv>> envs_;
  std::vector<std::mt19937_64> action_rngs_;
  std::vector<Vector> cur_obs_;
  std::vector<double> episode_acc_;
  std::mt19937_64 rng_;

  ActorCritic ac_;
  nn::Adam opt_;
  nn::RunningNormalizer obs_norm_, priv_norm_;

  std::optional<motion::MotionDataset> dataset_;
  nn::RunningNormalizer style_norm_;
  std::optional<adversary::Discriminator> disc_;
  std::optional<him::HimEstimator> him_;
  std::optional<curiosity::CuriosityModule> curiosity_;

  std::int64_t iteration_ = 0;
  std::int64_t env_steps_ = 0;
  RolloutBatch last_;
};

/// Terms of the per-step total in accounting order.
double total_reward(double task, double style, double curiosity, const TrainConfig& cfg);

struct TrainResult {
  std::string metrics_path;
  std::vector<std::string> checkpoints;
  std::int64_t iterations_run = 0;
};

/// Runs cfg.iterations iterations inside `run_dir`: metrics.csv, config.cfg and
/// checkpoints/ckpt_<iter>.bin (initial, every checkpoint_every, final).
/// With `resume`, continues from that checkpoint and appends to metrics.csv.
/// `on_iteration` sees each metrics row after it is written.
TrainResult train(const TrainConfig& cfg, const std::string& run_dir, const std::string& resume = "",
                  const std::function<void(const cli::MetricsRow&)>& on_iteration = {});

/// Loads a checkpoint's policy snapshot and config without building environments.
std::pair<TrainConfig, PolicySnapshot> load_policy(const std::string& checkpoint);

}  // namespace amphim::train
