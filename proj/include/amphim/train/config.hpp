#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amphim/adversary/losses.hpp"
#include "amphim/sim/types.hpp"

namespace amphim::train {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvKind { biped, point_mass };
const char* to_string(EnvKind k);

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatches = 4;
  double lr = 3e-4;
  double entropy_coef = 5e-3;
  double value_coef = 1.0;
  double grad_clip = 1.0;
  double init_log_std = -1.0;
  std::vector<int> actor_hidden{128, 128};
  std::vector<int> critic_hidden{128, 128};
};

struct CommandConfig {
  sim::Range lin_vel_x{-0.5, 1.0};
  double resample_time = 5.0;  // s
};

struct PointMassConfig {
  double alpha = 0.2;
  int episode_length = 200;
  int resample_steps = 50;
};

struct TrainConfig {
  std::uint64_t seed = 1;
  std::int64_t iterations = 1500;
  int num_envs = 256;
  int horizon = 24;
  int workers = 0;  // 0: every available thread; 1: single-worker deterministic mode
  std::int64_t checkpoint_every = 100;
  double reward_scale = 0.02;  // applied to the total reward inside the return only
  EnvKind env = EnvKind::biped;

  PpoConfig ppo;
  sim::RewardWeights weights;

  bool use_style = true;
  adversary::Criterion criterion = adversary::Criterion::lsgan;
  double style_weight = 1.0;
  double wgan_k = 2.0;
  double wgan_p = 6.0;
  double disc_lr = 1e-4;
  int disc_updates = 2;
  int disc_batch = 512;
  std::vector<int> disc_hidden{128, 128};

  bool use_him = true;
  int him_latent = 16;
  double him_lr = 1e-3;
  double him_temperature = 0.1;
  std::vector<int> him_hidden{128, 128};

  bool use_curiosity = false;
  int curiosity_bits = 32;
  std::int64_t curiosity_warmup = 10000;

  CommandConfig command;
  PointMassConfig point_mass;

  double episode_timeout = 20.0;
  int history_length = 6;
  double push_interval = 8.0;
  bool randomize = true;
  sim::RandomizationRanges ranges;

  void validate() const;
};

/// Keys whose values select an ablation arm.
const std::vector<std::string>& toggle_keys();

/// Applies `key = value` lines; '#' starts a comment. Unknown keys and bad values
/// throw ConfigError naming the key (and `origin:line` when given).
void apply_text(TrainConfig& cfg, const std::string& text, const std::string& origin = "");
void apply_override(TrainConfig& cfg, const std::string& assignment);
void apply_file(TrainConfig& cfg, const std::string& path);

/// Sorted `key = value` lines covering every key.
std::string canonical_text(const TrainConfig& cfg);
/// Canonical text with the toggle keys removed.
std::string parity_text(const TrainConfig& cfg);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);
std::string config_hash(const TrainConfig& cfg);
std::string parity_hash(const TrainConfig& cfg);

/// Resolves a preset name (e.g. "amp") to configs/<name>.cfg; paths pass through.
std::string resolve_preset(const std::string& name_or_path);

/// Full config: defaults, then each file in order, then overrides; validated.
TrainConfig load_config(const std::vector<std::string>& files, const std::vector<std::string>& overrides);

}  // namespace amphim::train
