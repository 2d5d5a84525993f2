#include "amphim/eval/policy_agent.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace amphim::eval {

PolicyAgent::PolicyAgent(const train::TrainConfig& cfg, std::shared_ptr<const train::PolicySnapshot> policy)
    : policy_(std::move(policy)), env_(train::make_env(cfg)) {
  if (!policy_) throw std::invalid_argument("policy agent: null policy");
  const int expected = env_->obs_dim() + (policy_->him ? 3 + policy_->him->config().latent_dim : 0);
  if (policy_->ac.actor().input_dim() != expected || policy_->obs_norm.dim() != env_->obs_dim()) {
    throw std::invalid_argument("policy agent: checkpoint policy input does not match the environment");
  }
}

double PolicyAgent::dt() const {
  if (const auto* b = dynamic_cast<const train::BipedTaskEnv*>(env_.get())) return b->env().config().control_dt();
  return 0.02;
}

void PolicyAgent::reset(std::uint64_t seed) {
  env_->reset(seed);
  falls_ = 0;
}

Eigen::VectorXd PolicyAgent::act() const {
  Eigen::VectorXd obs = env_->observation();
  // A newly held command is visible to the policy at once, as during training.
  if (dynamic_cast<const train::BipedTaskEnv*>(env_.get())) obs[sim::ObsLayout::kCommand] = env_->command();
  return policy_->ac.mean(policy_->policy_input(obs, env_->history()));
}

double PolicyAgent::step(double v_cmd) {
  if (env_->command() != v_cmd) env_->hold_command(v_cmd);
  last_ = env_->step(act());
  if (last_.fell || last_.faulted) ++falls_;
  return env_->true_velocity().x();
}

Eigen::VectorXd PolicyAgent::joint_positions() const {
  const auto* b = dynamic_cast<const train::BipedTaskEnv*>(env_.get());
  if (!b) throw std::logic_error("policy agent: joint positions exist only for the biped");
  return b->env().state().dof_pos;
}

LoadedPolicy load_checkpoint_policy(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw std::runtime_error("checkpoint not found: " + path);
  auto [cfg, snap] = train::load_policy(path);
  return {std::move(cfg), std::make_shared<const train::PolicySnapshot>(std::move(snap))};
}

train::TrainConfig eval_config(train::TrainConfig cfg, double horizon_s) {
  cfg.num_envs = 1;
  cfg.workers = 1;
  cfg.episode_timeout = std::max(cfg.episode_timeout, horizon_s + 1.0);
  cfg.point_mass.episode_length =
      std::max(cfg.point_mass.episode_length, static_cast<int>(std::ceil(horizon_s / 0.02)) + 1);
  return cfg;
}

AgentFactory agent_factory(const LoadedPolicy& p, double horizon_s) {
  const train::TrainConfig cfg = eval_config(p.config, horizon_s);
  const auto policy = p.policy;
  return [cfg, policy] { return std::make_unique<PolicyAgent>(cfg, policy); };
}

std::vector<DtwRecord> dtw_against_clips(const LoadedPolicy& p, const std::vector<motion::MotionClip>& clips,
                                         int episodes, std::uint64_t seed, double warmup_s) {
  if (episodes < 1) throw std::invalid_argument("dtw: episodes must be >= 1");
  std::vector<DtwRecord> out(clips.size() * static_cast<std::size_t>(episodes));
  std::vector<std::string> errors(out.size());
  const int total = static_cast<int>(out.size());
#pragma omp parallel for schedule(dynamic)
  for (int idx = 0; idx < total; ++idx) {
    const auto& clip = clips[static_cast<std::size_t>(idx / episodes)];
    const int e = idx % episodes;
    try {
      const double horizon = warmup_s + clip.dt * static_cast<double>(clip.size());
      PolicyAgent agent(eval_config(p.config, horizon), p.policy);
      agent.reset(seed + static_cast<std::uint64_t>(e));
      const int warmup = static_cast<int>(std::lround(warmup_s / agent.dt()));
      for (int k = 0; k < warmup; ++k) agent.step(clip.nominal_speed);
      Eigen::MatrixXd gen(sim::kNumJoints, static_cast<Eigen::Index>(clip.size()));
      Eigen::MatrixXd ref(sim::kNumJoints, static_cast<Eigen::Index>(clip.size()));
      for (std::size_t k = 0; k < clip.size(); ++k) {
        agent.step(clip.nominal_speed);
        gen.col(static_cast<Eigen::Index>(k)) = agent.joint_positions();
        ref.col(static_cast<Eigen::Index>(k)) = clip.frames[k].dof_pos;
      }
      out[static_cast<std::size_t>(idx)] = {clip.label, clip.nominal_speed, e, dtw(gen, ref).distance,
                                            static_cast<int>(clip.size())};
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(idx)] = ex.what();
    }
  }
  for (const auto& err : errors) {
    if (!err.empty()) throw std::runtime_error("dtw: " + err);
  }
  return out;
}

}  // namespace amphim::eval
