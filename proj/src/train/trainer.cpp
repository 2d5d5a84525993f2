#include "amphim/train/trainer.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "amphim/io/csv.hpp"
#include "amphim/motion/retarget.hpp"

namespace amphim::train {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t env_seed(std::uint64_t seed, int e) { return splitmix(seed * 1000003ULL + static_cast<std::uint64_t>(e)); }
std::uint64_t action_seed(std::uint64_t seed, int e) { return splitmix(env_seed(seed, e) ^ 0xa5a5a5a5a5a5a5a5ULL); }

void write_rng(io::BinaryWriter& w, const std::mt19937_64& rng) {
  std::ostringstream text;
  text << rng;
  w.str(text.str());
}

void read_rng(io::BinaryReader& r, std::mt19937_64& rng) {
  std::istringstream text(r.str());
  text >> rng;
  if (!text) throw io::FormatError("checkpoint: corrupt RNG state");
}

void save_adam(io::BinaryWriter& w, const nn::Adam& a) {
  w.vec(a.first_moment());
  w.vec(a.second_moment());
  w.i64(a.step_count());
}

void load_adam(io::BinaryReader& r, nn::Adam& a) {
  Vector m = r.vec(), v = r.vec();
  if (m.size() != a.first_moment().size() || v.size() != a.second_moment().size()) {
    throw io::FormatError("checkpoint: optimizer size mismatch");
  }
  a.first_moment() = m;
  a.second_moment() = v;
  a.set_step_count(r.i64());
}

him::HimConfig him_config(const TrainConfig& cfg, const TaskEnv& env) {
  him::HimConfig h;
  h.history = env.history_length();
  h.obs_dim = env.obs_dim();
  h.latent_dim = cfg.him_latent;
  h.hidden = cfg.him_hidden;
  h.lr = cfg.him_lr;
  h.temperature = cfg.him_temperature;
  return h;
}

int policy_input_dim(const TrainConfig& cfg, const TaskEnv& env) {
  return env.obs_dim() + (cfg.use_him ? 3 + cfg.him_latent : 0);
}

// Canonical text with run-length and worker-count keys blanked, for resume checks.
std::string resume_identity(TrainConfig cfg) {
  cfg.iterations = 0;
  cfg.workers = 0;
  return canonical_text(cfg);
}

void save_him(io::BinaryWriter& w, const him::HimEstimator& h) {
  w.vec(h.trunk().params());
  w.vec(h.head().params());
  w.vec(h.projection().params());
  save_adam(w, h.optimizer());
}

void load_him(io::BinaryReader& r, him::HimEstimator& h) {
  for (Mlp* net : {&h.trunk(), &h.head(), &h.projection()}) {
    Vector p = r.vec();
    if (p.size() != net->params().size()) throw io::FormatError("checkpoint: estimator size mismatch");
    net->params() = p;
  }
  load_adam(r, h.optimizer());
}

}  // namespace

double total_reward(double task, double style, double curiosity, const TrainConfig& cfg) {
  double total = task;
  if (cfg.use_style) total += cfg.style_weight * style;
  if (cfg.use_curiosity) total += curiosity;
  return total;
}

Matrix PolicySnapshot::normalized_histories(const Matrix& histories) const {
  const Eigen::Index d = obs_norm.dim();
  if (d == 0 || histories.rows() % d != 0) throw std::invalid_argument("policy: history width mismatch");
  Matrix flat = Eigen::Map<const Matrix>(histories.data(), d, histories.size() / d);
  flat = obs_norm.apply(flat);
  return Eigen::Map<const Matrix>(flat.data(), histories.rows(), histories.cols());
}

Matrix PolicySnapshot::policy_inputs(const Matrix& obs, const Matrix& histories) const {
  const Matrix o = obs_norm.apply(obs);
  if (!him) return o;
  const him::HimBatch b = him->encode_batch(normalized_histories(histories));
  Matrix out(o.rows() + b.v_hat.rows() + b.z.rows(), o.cols());
  out << o, b.v_hat, b.z;
  return out;
}

Vector PolicySnapshot::policy_input(const Vector& obs, const Vector& history) const {
  return policy_inputs(obs, history).col(0);
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate();
  Eigen::setNbThreads(1);
  for (int e = 0; e < cfg_.num_envs; ++e) {
    envs_.push_back(make_env(cfg_));
    cur_obs_.push_back(envs_.back()->reset(env_seed(cfg_.seed, e)));
    action_rngs_.emplace_back(action_seed(cfg_.seed, e));
  }
  episode_acc_.assign(envs_.size(), 0.0);
  const TaskEnv& env0 = *envs_.front();
  if (cfg_.use_style && !env0.has_style()) {
    throw ConfigError(std::string("style.enabled: the ") + to_string(cfg_.env) + " env has no style features");
  }
  if (cfg_.use_curiosity && env0.curiosity_features().size() != curiosity::kFeatureDim) {
    throw ConfigError(std::string("curiosity.enabled: the ") + to_string(cfg_.env) + " env has no curiosity features");
  }

  ac_ = ActorCritic(policy_input_dim(cfg_, env0), env0.obs_dim() + env0.privileged_dim(), env0.action_dim(), cfg_.ppo,
                    rng_);
  opt_ = nn::Adam(ac_.size(), {cfg_.ppo.lr});
  obs_norm_ = nn::RunningNormalizer(env0.obs_dim());
  priv_norm_ = nn::RunningNormalizer(env0.privileged_dim());

  if (cfg_.use_style) {
    dataset_.emplace(motion::default_clips(sim::RobotMorphology{}));
    style_norm_ = nn::RunningNormalizer(motion::kStyleDim);
    style_norm_.update(dataset_->all_features());
    style_norm_.freeze();
    adversary::AdversaryConfig a;
    a.criterion = cfg_.criterion;
    a.reward_map = adversary::AdversaryConfig::default_map(cfg_.criterion);
    a.wgan_k = cfg_.wgan_k;
    a.wgan_p = cfg_.wgan_p;
    a.style_weight = cfg_.style_weight;
    a.updates_per_iteration = cfg_.disc_updates;
    a.lr = cfg_.disc_lr;
    disc_.emplace(2 * motion::kStyleDim, cfg_.disc_hidden, a, rng_);
  }
  if (cfg_.use_him) him_.emplace(him_config(cfg_, env0), rng_);
  if (cfg_.use_curiosity) {
    curiosity::CuriosityConfig c;
    c.bits = cfg_.curiosity_bits;
    c.warmup_steps = cfg_.curiosity_warmup;
    curiosity_.emplace(c, splitmix(cfg_.seed ^ 0xc0ffeeULL));
  }
}

int Trainer::threads() const { return cfg_.workers == 0 ? omp_get_max_threads() : cfg_.workers; }

PolicySnapshot Trainer::snapshot() const { return {ac_, obs_norm_, him_}; }

Vector Trainer::critic_input(const Vector& obs, const Vector& privileged) const {
  Vector out(obs.size() + privileged.size());
  out << obs_norm_.apply(obs), priv_norm_.apply(privileged);
  return out;
}

RolloutBatch Trainer::collect(bool stochastic) {
  const int n = num_envs(), horizon = cfg_.horizon;
  const TaskEnv& env0 = *envs_.front();
  const Eigen::Index total = static_cast<Eigen::Index>(n) * horizon;
  const int od = env0.obs_dim(), hd = od * env0.history_length(), pd = env0.privileged_dim();
  const int ad = env0.action_dim(), sd = motion::kStyleDim;
  const bool style = cfg_.use_style, cur = cfg_.use_curiosity;
  const PolicySnapshot snap{ac_, obs_norm_, him_};

  RolloutBatch b;
  b.num_envs = n;
  b.horizon = horizon;
  b.obs.resize(od, total);
  b.privileged.resize(pd, total);
  b.policy_in.resize(ac_.actor().input_dim(), total);
  b.critic_in.resize(od + pd, total);
  b.actions.resize(ad, total);
  b.log_prob.resize(total);
  b.values.resize(total);
  b.raw_terms.resize(6, total);
  b.task_reward.resize(total);
  b.style_reward = Vector::Zero(total);
  b.curiosity_reward = Vector::Zero(total);
  b.total_reward.resize(total);
  b.command.resize(total);
  b.done.assign(static_cast<std::size_t>(total), 0);
  b.timed_out = b.fell = b.faulted = b.done;
  b.history.resize(hd, total);
  b.next_history.resize(hd, total);
  b.velocity.resize(3, total);
  if (style) b.style_pairs.resize(2 * sd, total);

  Matrix obs(od, n), hist(hd, n), priv(pd, n), style_now(style ? sd : 0, n);
  std::vector<EnvStep> steps(static_cast<std::size_t>(n));
  const Vector std_dev = ac_.log_std().array().exp().matrix();

  for (int t = 0; t < horizon; ++t) {
    const Eigen::Index base = static_cast<Eigen::Index>(t) * n;
    for (int e = 0; e < n; ++e) {
      const TaskEnv& env = *envs_[static_cast<std::size_t>(e)];
      obs.col(e) = cur_obs_[static_cast<std::size_t>(e)];
      hist.col(e) = env.history();
      priv.col(e) = env.privileged();
      if (style) style_now.col(e) = env.style_features();
      b.velocity.col(base + e) = env.true_velocity();
      b.command[base + e] = env.command();
    }
    const Matrix pin = snap.policy_inputs(obs, hist);
    Matrix cin(od + pd, n);
    cin << obs_norm_.apply(obs), priv_norm_.apply(priv);
    const Matrix mean = ac_.mean(pin);
    const Vector values = ac_.value(cin);
    Matrix actions = mean;
    if (stochastic) {
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int e = 0; e < n; ++e) {
        auto& rng = action_rngs_[static_cast<std::size_t>(e)];
        for (int k = 0; k < ad; ++k) actions(k, e) += std_dev[k] * gauss(rng);
      }
    }
    const Vector log_prob = gaussian_log_prob(mean, ac_.log_std(), actions);

    std::exception_ptr failure;
#pragma omp parallel for num_threads(threads()) schedule(static)
    for (int e = 0; e < n; ++e) {
      try {
        steps[static_cast<std::size_t>(e)] = envs_[static_cast<std::size_t>(e)]->step(actions.col(e));
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    Vector rs = Vector::Zero(n), rc = Vector::Zero(n);
    if (style) {
      Matrix pairs(2 * sd, n);
      Matrix next(sd, n);
      for (int e = 0; e < n; ++e) next.col(e) = steps[static_cast<std::size_t>(e)].next_style;
      pairs << style_norm_.apply(style_now), style_norm_.apply(next);
      rs = disc_->rewards(pairs);
      b.style_pairs.middleCols(base, n) = pairs;
    }
    if (cur) {
      Matrix feats(curiosity::kFeatureDim, n);
      for (int e = 0; e < n; ++e) feats.col(e) = steps[static_cast<std::size_t>(e)].next_curiosity;
      rc = curiosity_->rewards(feats);
    }

    b.obs.middleCols(base, n) = obs;
    b.privileged.middleCols(base, n) = priv;
    b.policy_in.middleCols(base, n) = pin;
    b.critic_in.middleCols(base, n) = cin;
    b.actions.middleCols(base, n) = actions;
    b.log_prob.segment(base, n) = log_prob;
    b.values.segment(base, n) = values;
    b.history.middleCols(base, n) = hist;
    for (int e = 0; e < n; ++e) {
      const auto se = static_cast<std::size_t>(e);
      const EnvStep& s = steps[se];
      const Eigen::Index i = base + e;
      const auto ii = static_cast<std::size_t>(i);
      for (int k = 0; k < 6; ++k) b.raw_terms(k, i) = s.raw[static_cast<std::size_t>(k)];
      b.task_reward[i] = s.task_reward;
      b.style_reward[i] = rs[e];
      b.curiosity_reward[i] = rc[e];
      b.total_reward[i] = total_reward(s.task_reward, rs[e], rc[e], cfg_);
      b.done[ii] = s.done;
      b.timed_out[ii] = s.timed_out;
      b.fell[ii] = s.fell;
      b.faulted[ii] = s.faulted;
      b.next_history.col(i) = s.next_history;
      episode_acc_[se] += s.task_reward;
      if (s.done) {
        b.episode_returns.push_back(episode_acc_[se]);
        episode_acc_[se] = 0.0;
      }
      cur_obs_[se] = s.obs;
    }
  }

  for (int e = 0; e < n; ++e) {
    obs.col(e) = cur_obs_[static_cast<std::size_t>(e)];
    priv.col(e) = envs_[static_cast<std::size_t>(e)]->privileged();
  }
  Matrix cin(od + pd, n);
  cin << obs_norm_.apply(obs), priv_norm_.apply(priv);
  b.last_values = ac_.value(cin);
  env_steps_ += total;
  return b;
}

DiscStats Trainer::update_discriminator(const RolloutBatch& b) {
  DiscStats out;
  const int updates = cfg_.disc_updates;
  if (updates == 0) return out;
  const Eigen::Index n = b.style_pairs.cols();
  const auto batch = static_cast<Eigen::Index>(std::min<Eigen::Index>(cfg_.disc_batch, n));
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  for (int u = 0; u < updates; ++u) {
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(batch));
    for (auto& c : cols) c = pick(rng_);
    const Matrix fake = b.style_pairs(Eigen::all, cols);
    Matrix real = dataset_->sample_matrix(static_cast<std::size_t>(batch), rng_);
    Matrix real_n(real.rows(), real.cols());
    real_n << style_norm_.apply(real.topRows(motion::kStyleDim)), style_norm_.apply(real.bottomRows(motion::kStyleDim));
    const adversary::LossResult r = disc_->update(real_n, fake, rng_);
    out.loss += r.loss / updates;
    out.real_mean += r.real_mean / updates;
    out.fake_mean += r.fake_mean / updates;
    out.penalty += r.penalty / updates;
  }
  return out;
}

std::vector<std::string> Trainer::metric_columns() {
  std::vector<std::string> c{"iteration",         "env_steps",         "task_reward_mean", "total_reward_mean",
                             "style_reward_mean", "style_reward_std",  "curiosity_reward_mean"};
  for (const char* name : sim::kRewardTermNames) c.push_back(std::string("raw_") + name);
  for (const char* name : {"episode_return", "episodes", "fall_fraction", "surrogate", "value_loss", "entropy",
                           "approx_kl", "clip_fraction", "skipped", "disc_loss", "disc_real", "disc_fake",
                           "disc_penalty", "him_velocity_loss", "him_contrastive_loss", "him_velocity_mae",
                           "curiosity_distinct", "curiosity_total", "action_std"}) {
    c.emplace_back(name);
  }
  return c;
}

cli::MetricsRow Trainer::iterate() {
  RolloutBatch b = collect(true);
  const Eigen::Index n = b.size();

  Vector ppo_reward = b.total_reward * cfg_.reward_scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (b.timed_out[static_cast<std::size_t>(i)]) ppo_reward[i] += cfg_.ppo.gamma * b.values[i];
  }
  const Advantages adv =
      compute_gae(ppo_reward, b.values, b.done, b.last_values, b.num_envs, cfg_.ppo.gamma, cfg_.ppo.lambda);
  const PpoBatch pb{b.policy_in, b.critic_in, b.actions, b.log_prob, normalize_advantages(adv.advantages),
                    adv.returns};

  him::HimStats him_stats;
  int him_updates = 0;
  Matrix hist_n, next_n;
  if (him_) {
    const PolicySnapshot snap{ac_, obs_norm_, std::nullopt};
    hist_n = snap.normalized_histories(b.history);
    next_n = snap.normalized_histories(b.next_history);
  }
  const auto on_minibatch = [&](const std::vector<Eigen::Index>& cols) {
    if (!him_) return;
    std::vector<Eigen::Index> ok;
    for (Eigen::Index c : cols) {
      if (!b.faulted[static_cast<std::size_t>(c)]) ok.push_back(c);
    }
    if (ok.size() < 2) return;
    const him::HimStats s = him_->update(hist_n(Eigen::all, ok), next_n(Eigen::all, ok), b.velocity(Eigen::all, ok));
    him_stats.velocity_loss += s.velocity_loss;
    him_stats.contrastive_loss += s.contrastive_loss;
    him_stats.velocity_mae += s.velocity_mae;
    ++him_updates;
  };
  const PpoStats ps = ppo_update(ac_, opt_, pb, cfg_.ppo, rng_, on_minibatch);
  if (him_updates > 0) {
    him_stats.velocity_loss /= him_updates;
    him_stats.contrastive_loss /= him_updates;
    him_stats.velocity_mae /= him_updates;
  }

  DiscStats ds;
  if (disc_) ds = update_discriminator(b);

  obs_norm_.update(b.obs);
  priv_norm_.update(b.privileged);
  ++iteration_;

  const double nd = static_cast<double>(n);
  double falls = 0.0;
  for (char f : b.fell) falls += f ? 1.0 : 0.0;
  double episode_return = std::nan("");
  if (!b.episode_returns.empty()) {
    double s = 0.0;
    for (double r : b.episode_returns) s += r;
    episode_return = s / static_cast<double>(b.episode_returns.size());
  }
  const double style_mean = b.style_reward.mean();
  const double style_std = std::sqrt((b.style_reward.array() - style_mean).square().mean());

  cli::MetricsRow row;
  const auto cols = metric_columns();
  std::size_t k = 0;
  const auto put = [&](double v) { row.emplace_back(cols[k++], v); };
  put(static_cast<double>(iteration_));
  put(static_cast<double>(env_steps_));
  put(b.task_reward.mean());
  put(b.total_reward.mean());
  put(style_mean);
  put(style_std);
  put(b.curiosity_reward.mean());
  for (int t = 0; t < 6; ++t) put(b.raw_terms.row(t).mean());
  put(episode_return);
  put(static_cast<double>(b.episode_returns.size()));
  put(falls / nd);
  put(ps.surrogate);
  put(ps.value_loss);
  put(ps.entropy);
  put(ps.approx_kl);
  put(ps.clip_fraction);
  put(static_cast<double>(ps.skipped));
  put(ds.loss);
  put(ds.real_mean);
  put(ds.fake_mean);
  put(ds.penalty);
  put(him_stats.velocity_loss);
  put(him_stats.contrastive_loss);
  put(him_stats.velocity_mae);
  put(curiosity_ ? static_cast<double>(curiosity_->table().distinct()) : 0.0);
  put(curiosity_ ? static_cast<double>(curiosity_->table().total()) : 0.0);
  put(ac_.log_std().array().exp().mean());
  last_ = std::move(b);
  return row;
}

void Trainer::save_checkpoint(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open checkpoint for writing");
    io::BinaryWriter w(out);
    w.magic("ACKP");
    w.u32(kCheckpointVersion);
    w.str(canonical_text(cfg_));
    w.i64(iteration_);
    w.i64(env_steps_);
    write_rng(w, rng_);
    ac_.save(w);
    obs_norm_.save(w);
    save_adam(w, opt_);
    priv_norm_.save(w);
    w.boolean(disc_.has_value());
    if (disc_) {
      w.vec(disc_->net().params());
      save_adam(w, disc_->optimizer());
    }
    w.boolean(him_.has_value());
    if (him_) save_him(w, *him_);
    w.boolean(curiosity_.has_value());
    if (curiosity_) curiosity_->save(w);
    w.u64(envs_.size());
    for (std::size_t e = 0; e < envs_.size(); ++e) {
      envs_[e]->save(w);
      write_rng(w, action_rngs_[e]);
      w.vec(cur_obs_[e]);
      w.f64(episode_acc_[e]);
    }
    out.flush();
    if (!out) throw std::runtime_error(path + ": checkpoint write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error(path + ": cannot finalize checkpoint: " + ec.message());
}

namespace {

std::ifstream open_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open checkpoint");
  return in;
}

TrainConfig read_header(io::BinaryReader& r, const std::string& path) {
  r.expect_magic("ACKP");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw io::FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  TrainConfig cfg;
  apply_text(cfg, r.str(), path + "[config]");
  return cfg;
}

}  // namespace

void Trainer::load_checkpoint(const std::string& path) {
  std::ifstream in = open_checkpoint(path);
  io::BinaryReader r(in);
  const TrainConfig stored = read_header(r, path);
  if (resume_identity(stored) != resume_identity(cfg_)) {
    throw ConfigError(path + ": checkpoint was written with a different config");
  }
  iteration_ = r.i64();
  env_steps_ = r.i64();
  read_rng(r, rng_);
  ac_.load(r);
  obs_norm_.load(r);
  load_adam(r, opt_);
  priv_norm_.load(r);
  if (r.boolean() != disc_.has_value()) throw io::FormatError(path + ": discriminator presence mismatch");
  if (disc_) {
    Vector p = r.vec();
    if (p.size() != disc_->net().params().size()) throw io::FormatError(path + ": discriminator size mismatch");
    disc_->net().params() = p;
    load_adam(r, disc_->optimizer());
  }
  if (r.boolean() != him_.has_value()) throw io::FormatError(path + ": estimator presence mismatch");
  if (him_) load_him(r, *him_);
  if (r.boolean() != curiosity_.has_value()) throw io::FormatError(path + ": curiosity presence mismatch");
  if (curiosity_) curiosity_->load(r);
  if (r.u64() != envs_.size()) throw io::FormatError(path + ": environment count mismatch");
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    envs_[e]->load(r);
    read_rng(r, action_rngs_[e]);
    cur_obs_[e] = r.vec();
    episode_acc_[e] = r.f64();
  }
}

std::pair<TrainConfig, PolicySnapshot> load_policy(const std::string& checkpoint) {
  std::ifstream in = open_checkpoint(checkpoint);
  io::BinaryReader r(in);
  TrainConfig cfg = read_header(r, checkpoint);
  r.i64();
  r.i64();
  std::mt19937_64 rng;
  read_rng(r, rng);
  PolicySnapshot snap;
  snap.ac.load(r);
  snap.obs_norm.load(r);
  r.vec();
  r.vec();
  r.i64();
  nn::RunningNormalizer skip;
  skip.load(r);
  if (r.boolean()) {
    r.vec();
    r.vec();
    r.vec();
    r.i64();
  }
  if (r.boolean()) {
    const std::unique_ptr<TaskEnv> env = make_env(cfg);
    std::mt19937_64 init(0);
    snap.him.emplace(him_config(cfg, *env), init);
    load_him(r, *snap.him);
  }
  return {cfg, std::move(snap)};
}

TrainResult train(const TrainConfig& cfg, const std::string& run_dir, const std::string& resume,
                  const std::function<void(const cli::MetricsRow&)>& on_iteration) {
  const fs::path dir(run_dir);
  fs::create_directories(dir / "checkpoints");
  {
    std::ofstream out(dir / "config.cfg", std::ios::trunc);
    out << canonical_text(cfg);
    if (!out) throw std::runtime_error((dir / "config.cfg").string() + ": cannot write config");
  }
  Trainer trainer(cfg);
  TrainResult result;
  result.metrics_path = (dir / "metrics.csv").string();
  if (!resume.empty()) {
    trainer.load_checkpoint(resume);
    // Drop rows past the checkpoint so the file stays one row per iteration.
    if (fs::exists(result.metrics_path)) {
      std::ifstream in(result.metrics_path);
      std::string line, kept;
      int lineno = 0;
      while (std::getline(in, line)) {
        if (++lineno > 2 && !line.empty()) {
          const double it = io::parse_double(io::split(line, ',').front(), "iteration");
          if (it > static_cast<double>(trainer.iteration())) continue;
        }
        kept += line + "\n";
      }
      in.close();
      std::ofstream(result.metrics_path, std::ios::trunc) << kept;
    }
  }
  cli::MetricsWriter writer(result.metrics_path, Trainer::metric_columns(), !resume.empty());
  const auto checkpoint = [&] {
    char name[32];
    std::snprintf(name, sizeof name, "ckpt_%06lld.bin", static_cast<long long>(trainer.iteration()));
    const std::string path = (dir / "checkpoints" / name).string();
    trainer.save_checkpoint(path);
    result.checkpoints.push_back(path);
  };
  if (resume.empty()) checkpoint();
  while (trainer.iteration() < cfg.iterations) {
    const cli::MetricsRow row = trainer.iterate();
    writer.write(row);
    ++result.iterations_run;
    if (on_iteration) on_iteration(row);
    if (trainer.iteration() % cfg.checkpoint_every == 0 || trainer.iteration() == cfg.iterations) checkpoint();
  }
  return result;
}

}  // namespace amphim::train
