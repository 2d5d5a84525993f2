#include "amphim/train/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "amphim/io/csv.hpp"

namespace amphim::train {

const char* to_string(EnvKind k) { return k == EnvKind::biped ? "biped" : "point_mass"; }

namespace {

struct Field {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const std::string t = io::trim(s);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + t + "'");
  }
  return v;
}

long long to_int(const std::string& key, const std::string& s) {
  long long v = 0;
  const std::string t = io::trim(s);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + t + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  const std::string t = io::trim(s);
  if (t == "true" || t == "1" || t == "on") return true;
  if (t == "false" || t == "0" || t == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + t + "'");
}

// "lo, hi", "[lo, hi]" or "lo hi".
std::vector<std::string> list_items(const std::string& s) {
  std::string t = io::trim(s);
  if (!t.empty() && t.front() == '[') t.erase(0, 1);
  if (!t.empty() && t.back() == ']') t.pop_back();
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  for (std::string item; in >> item;) out.push_back(item);
  return out;
}

sim::Range to_range(const std::string& key, const std::string& s) {
  const auto items = list_items(s);
  if (items.size() != 2) throw ConfigError(key + ": expected a range 'lo, hi', got '" + s + "'");
  return {to_double(key, items[0]), to_double(key, items[1])};
}

std::vector<int> to_widths(const std::string& key, const std::string& s) {
  std::vector<int> out;
  for (const auto& item : list_items(s)) {
    const long long w = to_int(key, item);
    if (w < 1 || w > 4096) throw ConfigError(key + ": layer width " + item + " outside [1, 4096]");
    out.push_back(static_cast<int>(w));
  }
  return out;
}

std::string widths_text(const std::vector<int>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? ", " : "") + std::to_string(w[i]);
  return out;
}

template <typename T>
Field real(const std::string& key, T& ref) {
  return {[&ref, key](const std::string& s) { ref = to_double(key, s); }, [&ref] { return fmt(ref); }};
}

template <typename T>
Field integer(const std::string& key, T& ref) {
  return {[&ref, key](const std::string& s) { ref = static_cast<T>(to_int(key, s)); },
          [&ref] { return std::to_string(ref); }};
}

Field flag(const std::string& key, bool& ref) {
  return {[&ref, key](const std::string& s) { ref = to_bool(key, s); }, [&ref] { return ref ? "true" : "false"; }};
}

Field range(const std::string& key, sim::Range& ref) {
  return {[&ref, key](const std::string& s) { ref = to_range(key, s); },
          [&ref] { return fmt(ref.lo) + ", " + fmt(ref.hi); }};
}

Field widths(const std::string& key, std::vector<int>& ref) {
  return {[&ref, key](const std::string& s) { ref = to_widths(key, s); }, [&ref] { return widths_text(ref); }};
}

std::map<std::string, Field> fields(TrainConfig& c) {
  std::map<std::string, Field> f;
  auto add_real = [&](const std::string& k, double& r) { f.emplace(k, real(k, r)); };

  f.emplace("train.seed", integer("train.seed", c.seed));
  f.emplace("train.iterations", integer("train.iterations", c.iterations));
  f.emplace("train.num_envs", integer("train.num_envs", c.num_envs));
  f.emplace("train.horizon", integer("train.horizon", c.horizon));
  f.emplace("train.workers", integer("train.workers", c.workers));
  f.emplace("train.checkpoint_every", integer("train.checkpoint_every", c.checkpoint_every));
  add_real("train.reward_scale", c.reward_scale);
  f.emplace("train.env", Field{[&c](const std::string& s) {
                                 const std::string t = io::trim(s);
                                 if (t == "biped") c.env = EnvKind::biped;
                                 else if (t == "point_mass") c.env = EnvKind::point_mass;
                                 else throw ConfigError("train.env: expected biped or point_mass, got '" + t + "'");
                               },
                               [&c] { return std::string(to_string(c.env)); }});

  add_real("ppo.gamma", c.ppo.gamma);
  add_real("ppo.lambda", c.ppo.lambda);
  add_real("ppo.clip_eps", c.ppo.clip_eps);
  f.emplace("ppo.epochs", integer("ppo.epochs", c.ppo.epochs));
  f.emplace("ppo.minibatches", integer("ppo.minibatches", c.ppo.minibatches));
  add_real("ppo.lr", c.ppo.lr);
  add_real("ppo.entropy_coef", c.ppo.entropy_coef);
  add_real("ppo.value_coef", c.ppo.value_coef);
  add_real("ppo.grad_clip", c.ppo.grad_clip);
  add_real("ppo.init_log_std", c.ppo.init_log_std);
  f.emplace("ppo.actor_hidden", widths("ppo.actor_hidden", c.ppo.actor_hidden));
  f.emplace("ppo.critic_hidden", widths("ppo.critic_hidden", c.ppo.critic_hidden));

  for (std::size_t i = 0; i < sim::kRewardTermNames.size(); ++i) {
    double* w[] = {&c.weights.feet_slip,          &c.weights.contact_forces, &c.weights.lin_vel_tracking,
                   &c.weights.ang_vel_tracking,   &c.weights.root_accel,     &c.weights.smoothness};
    add_real(std::string("reward.") + sim::kRewardTermNames[i], *w[i]);
  }
  add_real("reward.style_weight", c.style_weight);

  f.emplace("style.enabled", flag("style.enabled", c.use_style));
  f.emplace("style.criterion", Field{[&c](const std::string& s) {
                                       try {
                                         c.criterion = adversary::criterion_from_string(io::trim(s));
                                       } catch (const std::exception& e) {
                                         throw ConfigError(std::string("style.criterion: ") + e.what());
                                       }
                                     },
                                     [&c] { return std::string(adversary::to_string(c.criterion)); }});
  add_real("style.wgan_k", c.wgan_k);
  add_real("style.wgan_p", c.wgan_p);
  add_real("style.lr", c.disc_lr);
  f.emplace("style.updates", integer("style.updates", c.disc_updates));
  f.emplace("style.batch", integer("style.batch", c.disc_batch));
  f.emplace("style.hidden", widths("style.hidden", c.disc_hidden));

  f.emplace("him.enabled", flag("him.enabled", c.use_him));
  f.emplace("him.latent_dim", integer("him.latent_dim", c.him_latent));
  add_real("him.lr", c.him_lr);
  add_real("him.temperature", c.him_temperature);
  f.emplace("him.hidden", widths("him.hidden", c.him_hidden));

  f.emplace("curiosity.enabled", flag("curiosity.enabled", c.use_curiosity));
  f.emplace("curiosity.bits", integer("curiosity.bits", c.curiosity_bits));
  f.emplace("curiosity.warmup_steps", integer("curiosity.warmup_steps", c.curiosity_warmup));

  f.emplace("command.lin_vel_x", range("command.lin_vel_x", c.command.lin_vel_x));
  add_real("command.resample_time", c.command.resample_time);

  add_real("point_mass.alpha", c.point_mass.alpha);
  f.emplace("point_mass.episode_length", integer("point_mass.episode_length", c.point_mass.episode_length));
  f.emplace("point_mass.resample_steps", integer("point_mass.resample_steps", c.point_mass.resample_steps));

  add_real("sim.episode_timeout", c.episode_timeout);
  f.emplace("sim.history_length", integer("sim.history_length", c.history_length));
  add_real("sim.push_interval", c.push_interval);

  f.emplace("domain.enabled", flag("domain.enabled", c.randomize));
  f.emplace("domain.base_mass", range("domain.base_mass", c.ranges.base_mass_delta));
  f.emplace("domain.com_shift", range("domain.com_shift", c.ranges.com_shift));
  f.emplace("domain.friction", range("domain.friction", c.ranges.friction));
  f.emplace("domain.kp_factor", range("domain.kp_factor", c.ranges.kp_factor));
  f.emplace("domain.kd_factor", range("domain.kd_factor", c.ranges.kd_factor));
  f.emplace("domain.push_lin", range("domain.push_lin", c.ranges.push_lin));
  f.emplace("domain.push_ang", range("domain.push_ang", c.ranges.push_ang));
  f.emplace("domain.motor_strength", range("domain.motor_strength", c.ranges.motor_strength));
  f.emplace("domain.action_delay", range("domain.action_delay", c.ranges.action_delay_ms));
  return f;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

const std::vector<std::string>& toggle_keys() {
  static const std::vector<std::string> keys{"him.enabled", "style.criterion", "curiosity.enabled"};
  return keys;
}

void TrainConfig::validate() const {
  require(ppo.gamma >= 0.0 && ppo.gamma < 1.0, "ppo.gamma: must lie in [0, 1)");
  require(ppo.lambda >= 0.0 && ppo.lambda <= 1.0, "ppo.lambda: must lie in [0, 1]");
  require(ppo.clip_eps > 0.0, "ppo.clip_eps: must be > 0");
  require(ppo.epochs >= 1, "ppo.epochs: must be >= 1");
  require(ppo.minibatches >= 1, "ppo.minibatches: must be >= 1");
  require(ppo.lr > 0.0, "ppo.lr: must be > 0");
  require(ppo.entropy_coef >= 0.0, "ppo.entropy_coef: must be >= 0");
  require(ppo.value_coef >= 0.0, "ppo.value_coef: must be >= 0");
  require(ppo.grad_clip > 0.0, "ppo.grad_clip: must be > 0");
  require(num_envs >= 1, "train.num_envs: must be >= 1");
  require(horizon >= 1, "train.horizon: must be >= 1");
  require(static_cast<long long>(num_envs) * horizon >= ppo.minibatches,
          "ppo.minibatches: exceeds num_envs * horizon");
  require(iterations >= 0, "train.iterations: must be >= 0");
  require(workers >= 0, "train.workers: must be >= 0");
  require(checkpoint_every >= 1, "train.checkpoint_every: must be >= 1");
  require(reward_scale > 0.0, "train.reward_scale: must be > 0");
  require(style_weight >= 0.0, "reward.style_weight: must be >= 0");
  require(wgan_k > 0.0, "style.wgan_k: must be > 0");
  require(wgan_p >= 1.0, "style.wgan_p: must be >= 1");
  require(disc_lr > 0.0, "style.lr: must be > 0");
  require(disc_updates >= 0, "style.updates: must be >= 0");
  require(disc_batch >= 2, "style.batch: must be >= 2");
  require(him_latent >= 1, "him.latent_dim: must be >= 1");
  require(him_lr > 0.0, "him.lr: must be > 0");
  require(him_temperature > 0.0, "him.temperature: must be > 0");
  require(curiosity_bits >= 1 && curiosity_bits <= 64, "curiosity.bits: must lie in [1, 64]");
  require(curiosity_warmup >= 0, "curiosity.warmup_steps: must be >= 0");
  require(command.lin_vel_x.lo <= command.lin_vel_x.hi, "command.lin_vel_x: inverted range");
  require(command.resample_time > 0.0, "command.resample_time: must be > 0");
  require(point_mass.alpha > 0.0 && point_mass.alpha <= 1.0, "point_mass.alpha: must lie in (0, 1]");
  require(point_mass.episode_length >= 1, "point_mass.episode_length: must be >= 1");
  require(point_mass.resample_steps >= 1, "point_mass.resample_steps: must be >= 1");
  require(history_length >= 1, "sim.history_length: must be >= 1");
  require(episode_timeout >= 0.0, "sim.episode_timeout: must be >= 0");
  require(!ppo.actor_hidden.empty() && !ppo.critic_hidden.empty(), "ppo: hidden layer lists must be non-empty");
  try {
    ranges.validate(sim::RobotMorphology{});
  } catch (const sim::ConfigError& e) {
    throw ConfigError(std::string("domain.") + e.what());
  }
}

void apply_text(TrainConfig& cfg, const std::string& text, const std::string& origin) {
  auto f = fields(cfg);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = io::trim(line);
    if (t.empty()) continue;
    const std::string where = origin.empty() ? "" : origin + ":" + std::to_string(lineno) + ": ";
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value, got '" + t + "'");
    const std::string key = io::trim(t.substr(0, eq));
    const auto it = f.find(key);
    if (it == f.end()) throw ConfigError(where + key + ": unknown key");
    try {
      it->second.set(t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void apply_override(TrainConfig& cfg, const std::string& assignment) {
  if (assignment.find('=') == std::string::npos) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  apply_text(cfg, assignment);
}

void apply_file(TrainConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_text(cfg, buf.str(), path);
}

std::string canonical_text(const TrainConfig& cfg) {
  TrainConfig copy = cfg;
  std::string out;
  for (const auto& [key, field] : fields(copy)) out += key + " = " + field.get() + "\n";
  return out;
}

std::string parity_text(const TrainConfig& cfg) {
  TrainConfig copy = cfg;
  const auto& skip = toggle_keys();
  std::string out;
  for (const auto& [key, field] : fields(copy)) {
    if (std::find(skip.begin(), skip.end(), key) == skip.end()) out += key + " = " + field.get() + "\n";
  }
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const TrainConfig& cfg) { return hex64(fnv1a(canonical_text(cfg))); }
std::string parity_hash(const TrainConfig& cfg) { return hex64(fnv1a(parity_text(cfg))); }

std::string resolve_preset(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_path)) return name_or_path;
  const fs::path preset = fs::path(AMPHIM_PRESET_DIR) / (name_or_path + ".cfg");
  if (fs::exists(preset)) return preset.string();
  throw ConfigError(name_or_path + ": no such config file or preset");
}

TrainConfig load_config(const std::vector<std::string>& files, const std::vector<std::string>& overrides) {
  TrainConfig cfg;
  for (const auto& f : files) apply_file(cfg, resolve_preset(f));
  for (const auto& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

}  // namespace amphim::train
