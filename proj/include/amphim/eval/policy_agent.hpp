#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>

#include "amphim/eval/dtw.hpp"
#include "amphim/eval/tracking.hpp"
#include "amphim/motion/clip.hpp"
#include "amphim/train/task_env.hpp"
#include "amphim/train/trainer.hpp"

namespace amphim::eval {

/// A trained policy acting with its mean action in its own environment.
class PolicyAgent : public TrackingAgent {
 public:
  PolicyAgent(const train::TrainConfig& cfg, std::shared_ptr<const train::PolicySnapshot> policy);

  double dt() const override;
  void reset(std::uint64_t seed) override;
  double step(double v_cmd) override;
  int falls() const override { return falls_; }

  /// Action the policy takes in the current state.
  Eigen::VectorXd act() const;
  const train::EnvStep& last() const { return last_; }
  train::TaskEnv& env() { return *env_; }
  /// Joint positions of the biped; throws std::logic_error for other environments.
  Eigen::VectorXd joint_positions() const;
  const train::PolicySnapshot& policy() const { return *policy_; }

 private:
  std::shared_ptr<const train::PolicySnapshot> policy_;
  std::unique_ptr<train::TaskEnv> env_;
  train::EnvStep last_;
  int falls_ = 0;
};

struct LoadedPolicy {
  train::TrainConfig config;
  std::shared_ptr<const train::PolicySnapshot> policy;
};

/// Throws std::runtime_error naming the path when the checkpoint is missing.
LoadedPolicy load_checkpoint_policy(const std::string& path);

/// Evaluation copy of a training config: one environment, episodes long enough
/// for `horizon_s` seconds without timing out.
train::TrainConfig eval_config(train::TrainConfig cfg, double horizon_s);

AgentFactory agent_factory(const LoadedPolicy& p, double horizon_s);

/// For every reference clip, `episodes` seeded rollouts held at the clip's speed;
/// after `warmup_s` the joint positions over the clip's length are scored by DTW.
std::vector<DtwRecord> dtw_against_clips(const LoadedPolicy& p, const std::vector<motion::MotionClip>& clips,
                                         int episodes = 20, std::uint64_t seed = 1, double warmup_s = 1.0);

}  // namespace amphim::eval
