#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "amphim/cli/metrics.hpp"
#include "amphim/io/csv.hpp"
#include "amphim/train/config.hpp"
#include "amphim/train/ppo.hpp"
#include "amphim/train/trainer.hpp"

using namespace amphim;
using namespace amphim::train;
namespace fs = std::filesystem;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

Matrix randn(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("amphim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TrainConfig point_mass_config() {
  TrainConfig c;
  c.env = EnvKind::point_mass;
  c.use_style = false;
  c.use_him = false;
  c.num_envs = 8;
  c.horizon = 16;
  c.workers = 1;
  c.ppo.actor_hidden = {16, 16};
  c.ppo.critic_hidden = {16, 16};
  return c;
}

TrainConfig small_biped_config() {
  TrainConfig c;
  c.num_envs = 4;
  c.horizon = 8;
  c.workers = 1;
  c.ppo.actor_hidden = {16};
  c.ppo.critic_hidden = {16};
  c.him_hidden = {16};
  c.disc_hidden = {16};
  c.disc_batch = 16;
  c.use_curiosity = true;
  c.curiosity_warmup = 8;
  return c;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Config, EmptyTextGivesValidDefaults) {
  TrainConfig c;
  apply_text(c, "");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(canonical_text(c), canonical_text(TrainConfig{}));
  EXPECT_EQ(c.ppo.gamma, 0.99);
  EXPECT_EQ(c.num_envs, 256);
  EXPECT_EQ(c.horizon, 24);
  EXPECT_EQ(c.ppo.init_log_std, -1.0);
}

TEST(Config, InvertedFrictionNamesFriction) {
  try {
    load_config({}, {"domain.friction=[2, 0.1]"});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("friction"), std::string::npos) << e.what();
  }
}

TEST(Config, ErrorsNameTheKey) {
  TrainConfig c;
  const auto message = [&](const std::string& text) {
    try {
      apply_text(c, text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("ppo.gama = 0.9").find("ppo.gama"), std::string::npos);
  EXPECT_NE(message("train.num_envs = many").find("train.num_envs"), std::string::npos);
  EXPECT_NE(message("him.enabled = maybe").find("him.enabled"), std::string::npos);
  EXPECT_THROW(load_config({}, {"ppo.gamma=1.0"}), ConfigError);
  EXPECT_THROW(load_config({}, {"ppo.clip_eps=0"}), ConfigError);
  EXPECT_THROW(load_config({}, {"train.num_envs=0"}), ConfigError);
  EXPECT_THROW(apply_override(c, "gamma"), ConfigError);
}

TEST(Config, OverrideChangesHash) {
  const TrainConfig base = load_config({}, {});
  const TrainConfig over = load_config({}, {"ppo.gamma=0.95"});
  EXPECT_EQ(over.ppo.gamma, 0.95);
  EXPECT_NE(config_hash(base), config_hash(over));
  EXPECT_EQ(config_hash(base), config_hash(load_config({}, {})));
}

TEST(Config, CanonicalTextRoundTrips) {
  TrainConfig c = load_config({}, {"ppo.lr=0.000123", "domain.friction=0.3,1.7", "ppo.actor_hidden=32,8"});
  TrainConfig back;
  apply_text(back, canonical_text(c));
  EXPECT_EQ(canonical_text(back), canonical_text(c));
  EXPECT_EQ(back.ppo.lr, 0.000123);
  EXPECT_EQ(back.ppo.actor_hidden, (std::vector<int>{32, 8}));
}

TEST(Config, ArmPresetsDifferOnlyInToggles) {
  const std::vector<std::string> arms{"amp", "amp_him", "ampw_him", "ampw_him_plus"};
  std::vector<TrainConfig> cfgs;
  for (const auto& a : arms) cfgs.push_back(load_config({"desk", a}, {}));
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    EXPECT_EQ(parity_hash(cfgs[i]), parity_hash(cfgs[0])) << arms[i];
    EXPECT_NE(config_hash(cfgs[i]), config_hash(cfgs[0])) << arms[i];
  }
  EXPECT_FALSE(cfgs[0].use_him);
  EXPECT_TRUE(cfgs[1].use_him);
  EXPECT_EQ(cfgs[2].criterion, adversary::Criterion::wgan_div);
  EXPECT_TRUE(cfgs[3].use_curiosity);
}

TEST(Gae, TelescopesToRewardToGo) {
  const int n = 2, steps = 4;
  const Vector r = randn(n * steps, 1, 1);
  const std::vector<char> dones(n * steps, 0);
  const Advantages a = compute_gae(r, Vector::Zero(n * steps), dones, Vector::Zero(n), n, 1.0, 1.0);
  for (int e = 0; e < n; ++e) {
    for (int t = 0; t < steps; ++t) {
      double togo = 0.0;
      for (int k = t; k < steps; ++k) togo += r[k * n + e];
      EXPECT_NEAR(a.advantages[t * n + e], togo, 1e-12);
    }
  }
}

TEST(Gae, SingleTerminalStep) {
  const Vector r = Vector::Constant(1, 2.5), v = Vector::Constant(1, 0.75);
  const Advantages a = compute_gae(r, v, {1}, Vector::Constant(1, 100.0), 1, 0.99, 0.95);
  EXPECT_DOUBLE_EQ(a.advantages[0], 2.5 - 0.75);
  EXPECT_DOUBLE_EQ(a.returns[0], 2.5);
}

TEST(Gae, MatchesBruteForceSum) {
  const double gamma = 0.9, lambda = 0.8;
  const Vector r = randn(5, 1, 2), v = randn(5, 1, 3);
  const std::vector<char> dones{0, 0, 1, 0, 0};
  const double last = 0.37;
  const Advantages a = compute_gae(r, v, dones, Vector::Constant(1, last), 1, gamma, lambda);
  for (int t = 0; t < 5; ++t) {
    double sum = 0.0, w = 1.0;
    for (int k = t; k < 5; ++k) {
      const double next = dones[k] ? 0.0 : (k + 1 < 5 ? v[k + 1] : last);
      sum += w * (r[k] + gamma * next - v[k]);
      if (dones[k]) break;
      w *= gamma * lambda;
    }
    EXPECT_NEAR(a.advantages[t], sum, 1e-12) << t;
    EXPECT_NEAR(a.returns[t], sum + v[t], 1e-12);
  }
  EXPECT_THROW(compute_gae(r, v, dones, Vector::Zero(2), 2, gamma, lambda), std::invalid_argument);
}

TEST(Gae, NormalizedAdvantages) {
  const Vector n = normalize_advantages(randn(50, 1, 4, 3.0));
  EXPECT_NEAR(n.mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(n.array().square().mean()), 1.0, 1e-12);
  EXPECT_EQ(normalize_advantages(Vector::Constant(4, 2.0)), Vector::Zero(4));
}

TEST(Surrogate, ClippedBranchHasZeroGradient) {
  EXPECT_EQ(surrogate_ratio_grad(1.5, 1.0, 0.2), 0.0);
  EXPECT_EQ(surrogate_ratio_grad(0.5, -1.0, 0.2), 0.0);
  EXPECT_EQ(surrogate_ratio_grad(1.5, -1.0, 0.2), 1.0);
  EXPECT_EQ(surrogate_ratio_grad(1.1, 2.0, 0.2), -2.0);
}

TEST(Surrogate, ZeroAdvantagesGiveZeroPolicyGradient) {
  const Matrix mean = randn(3, 6, 1), act = randn(3, 6, 2);
  const Vector log_std = Vector::Constant(3, -0.5);
  Matrix gm;
  Vector gs;
  const double l = surrogate_loss(mean, log_std, act, randn(6, 1, 3), Vector::Zero(6), 0.2, &gm, &gs);
  EXPECT_EQ(l, 0.0);
  EXPECT_EQ(gm.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(gs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Surrogate, LogProbMatchesClosedForm) {
  Matrix mean(1, 1), act(1, 1);
  mean << 0.5;
  act << 1.5;
  const Vector lp = gaussian_log_prob(mean, Vector::Constant(1, std::log(2.0)), act);
  EXPECT_NEAR(lp[0], -0.5 * 0.25 - std::log(2.0) - 0.5 * std::log(2.0 * M_PI), 1e-15);
}

TEST(Surrogate, GradientsMatchFiniteDifferences) {
  const Matrix mean = randn(3, 8, 5, 0.5), act = randn(3, 8, 6, 0.5);
  const Vector log_std = randn(3, 1, 7, 0.3);
  // Old log-probs near the current ones so both clipped and unclipped samples occur.
  const Vector old = gaussian_log_prob(mean, log_std, act) + Vector(randn(8, 1, 8, 0.3));
  const Vector adv = randn(8, 1, 9);
  Matrix gm;
  Vector gs;
  SurrogateStats st;
  surrogate_loss(mean, log_std, act, old, adv, 0.2, &gm, &gs, &st);
  EXPECT_GT(st.clip_fraction, 0.0);
  EXPECT_LT(st.clip_fraction, 1.0);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    Matrix up = mean, down = mean;
    up.data()[i] += h;
    down.data()[i] -= h;
    const double fd = (surrogate_loss(up, log_std, act, old, adv, 0.2) - surrogate_loss(down, log_std, act, old, adv, 0.2)) / (2 * h);
    EXPECT_LT(rel_err(fd, gm.data()[i]), 1e-4) << i;
  }
  for (Eigen::Index i = 0; i < log_std.size(); ++i) {
    Vector up = log_std, down = log_std;
    up[i] += h;
    down[i] -= h;
    const double fd = (surrogate_loss(mean, up, act, old, adv, 0.2) - surrogate_loss(mean, down, act, old, adv, 0.2)) / (2 * h);
    EXPECT_LT(rel_err(fd, gs[i]), 1e-4) << i;
  }
}

TEST(ValueAndEntropy, GradientsMatchFiniteDifferences) {
  const Vector v = randn(7, 1, 1), t = randn(7, 1, 2);
  Vector g;
  value_loss(v, t, &g);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Vector up = v, down = v;
    up[i] += h;
    down[i] -= h;
    EXPECT_LT(rel_err((value_loss(up, t) - value_loss(down, t)) / (2 * h), g[i]), 1e-6);
  }
  const Vector s = randn(4, 1, 3);
  Vector ge;
  gaussian_entropy(s, &ge);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Vector up = s, down = s;
    up[i] += h;
    down[i] -= h;
    EXPECT_LT(rel_err((gaussian_entropy(up) - gaussian_entropy(down)) / (2 * h), ge[i]), 1e-6);
  }
  EXPECT_NEAR(gaussian_entropy(Vector::Zero(1)), 0.5 * (1.0 + std::log(2.0 * M_PI)), 1e-15);
}

TEST(PpoLossTest, FullObjectiveGradientMatchesFiniteDifferences) {
  PpoConfig cfg;
  cfg.actor_hidden = {16, 16};
  cfg.critic_hidden = {16, 16};
  std::mt19937_64 rng(3);
  ActorCritic ac(5, 7, 2, cfg, rng);
  ac.actor().init(rng, 1.0);
  PpoBatch b;
  b.policy_in = randn(5, 12, 10);
  b.critic_in = randn(7, 12, 11);
  b.actions = ac.mean(b.policy_in) + randn(2, 12, 12, 0.3);
  b.old_log_prob = gaussian_log_prob(ac.mean(b.policy_in), ac.log_std(), b.actions) + Vector(randn(12, 1, 13, 0.2));
  b.advantages = randn(12, 1, 14);
  b.returns = randn(12, 1, 15);
  std::vector<Eigen::Index> cols{0, 2, 3, 5, 7, 8, 11};
  Vector grad;
  ppo_loss(ac, b, cols, cfg, &grad);
  Vector p = ac.flat();
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    ac.set_flat(p);
    const double up = ppo_loss(ac, b, cols, cfg, nullptr).total;
    p[i] = saved - h;
    ac.set_flat(p);
    const double down = ppo_loss(ac, b, cols, cfg, nullptr).total;
    p[i] = saved;
    ac.set_flat(p);
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd) < 1e-8 && std::abs(grad[i]) < 1e-8) continue;
    ASSERT_LT(rel_err(fd, grad[i]), 1e-4) << i;
  }
}

TEST(Metrics, HeaderOnceAndRowsRoundTrip) {
  const fs::path dir = scratch_dir("metrics");
  const std::string path = (dir / "m.csv").string();
  {
    cli::MetricsWriter w(path, {"a", "b"});
    w.write({{"a", 0.1}, {"b", 1.0 / 3.0}});
    w.write({{"a", -2e-300}, {"b", 12345678.901234567}});
    EXPECT_THROW(w.write({{"b", 1.0}, {"a", 2.0}}), cli::SchemaError);
    EXPECT_THROW(w.write({{"a", 1.0}}), cli::SchemaError);
  }
  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# schema: metrics/1");
  EXPECT_EQ(lines[1], "a,b");
  const io::NumericTable t = io::read_numeric_csv(path);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], 1.0 / 3.0);
  EXPECT_EQ(t.rows[1][0], -2e-300);
  EXPECT_EQ(t.rows[1][1], 12345678.901234567);
  EXPECT_THROW(cli::MetricsWriter(path, {"a", "c"}, true), cli::SchemaError);
  cli::MetricsWriter again(path, {"a", "b"}, true);
  again.write({{"a", 1.0}, {"b", 2.0}});
  EXPECT_EQ(read_lines(path).size(), 5u);
}

TEST(TrainerTest, StyleRequiresStyleFeatures) {
  TrainConfig c = point_mass_config();
  c.use_style = true;
  EXPECT_THROW(Trainer{c}, ConfigError);
}

TEST(TrainerTest, AmpArmPolicyInputLacksEstimatorOutputs) {
  TrainConfig c = small_biped_config();
  c.use_him = false;
  const Trainer amp(c);
  EXPECT_EQ(amp.actor_critic().actor().input_dim(), sim::ObsLayout{}.dim());
  c.use_him = true;
  const Trainer him(c);
  EXPECT_EQ(him.actor_critic().actor().input_dim(), sim::ObsLayout{}.dim() + 3 + c.him_latent);
}

TEST(TrainerTest, RewardAccountingIsBitExact) {
  TrainConfig c = small_biped_config();
  Trainer t(c);
  for (int it = 0; it < 3; ++it) t.iterate();
  const RolloutBatch& b = t.last_batch();
  const auto w = c.weights.as_array();
  double curiosity_sum = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    double task = 0.0;
    for (int k = 0; k < 6; ++k) task += w[static_cast<std::size_t>(k)] * b.raw_terms(k, i);
    ASSERT_EQ(task, b.task_reward[i]);
    const double expected = task + c.style_weight * b.style_reward[i] + b.curiosity_reward[i];
    ASSERT_EQ(expected, b.total_reward[i]) << i;
    ASSERT_TRUE(std::isfinite(b.total_reward[i]));
    ASSERT_GE(b.style_reward[i], 0.0);
    ASSERT_LE(b.style_reward[i], 1.0);
    curiosity_sum += b.curiosity_reward[i];
  }
  EXPECT_GT(curiosity_sum, 0.0);
}

TEST(TrainerTest, TogglesOffGiveTaskSumAndZeroCuriosity) {
  TrainConfig c = small_biped_config();
  c.use_style = false;
  c.use_him = false;
  c.use_curiosity = false;
  Trainer t(c);
  const RolloutBatch b = t.collect();
  const auto w = c.weights.as_array();
  EXPECT_EQ(b.curiosity_reward.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.style_reward.cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    double task = 0.0;
    for (int k = 0; k < 6; ++k) task += w[static_cast<std::size_t>(k)] * b.raw_terms(k, i);
    ASSERT_EQ(b.total_reward[i], task);
  }
}

TEST(TrainerTest, MeanActionRolloutIsDeterministic) {
  const TrainConfig c = small_biped_config();
  Trainer a(c), b(c);
  const RolloutBatch ra = a.collect(false), rb = b.collect(false);
  EXPECT_EQ(ra.actions, rb.actions);
  EXPECT_EQ(ra.total_reward, rb.total_reward);
  EXPECT_EQ(ra.policy_in, rb.policy_in);
  EXPECT_EQ(ra.log_prob, rb.log_prob);
}

TEST(TrainerTest, SeededRunsAreBitIdentical) {
  const TrainConfig c = small_biped_config();
  Trainer a(c), b(c);
  for (int it = 0; it < 3; ++it) {
    const auto ra = a.iterate(), rb = b.iterate();
    for (std::size_t k = 0; k < ra.size(); ++k) {
      if (std::isnan(ra[k].second)) {
        EXPECT_TRUE(std::isnan(rb[k].second));
      } else {
        EXPECT_EQ(ra[k].second, rb[k].second) << ra[k].first;
      }
    }
  }
  EXPECT_EQ(a.actor_critic().flat(), b.actor_critic().flat());
}

TEST(TrainerTest, ZeroBudgetWritesInitialCheckpointAndEmptyBody) {
  TrainConfig c = point_mass_config();
  c.iterations = 0;
  const fs::path dir = scratch_dir("budget0");
  const TrainResult r = train::train(c, dir.string());
  ASSERT_EQ(r.checkpoints.size(), 1u);
  EXPECT_TRUE(fs::exists(r.checkpoints[0]));
  EXPECT_EQ(read_lines(r.metrics_path).size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "config.cfg"));
}

TEST(TrainerTest, ResumeReproducesNextIteration) {
  TrainConfig c = small_biped_config();
  c.iterations = 3;
  c.checkpoint_every = 1;
  const fs::path a = scratch_dir("resume_a"), b = scratch_dir("resume_b");
  train::train(c, a.string());
  train::train(c, b.string(), (a / "checkpoints" / "ckpt_000002.bin").string());
  const auto full = read_lines(a / "metrics.csv");
  const auto resumed = read_lines(b / "metrics.csv");
  ASSERT_EQ(full.size(), 5u);
  ASSERT_EQ(resumed.size(), 3u);
  EXPECT_EQ(resumed[1], full[1]);
  EXPECT_EQ(resumed[2], full[4]);

  // Resuming inside the original directory truncates later rows first.
  train::train(c, a.string(), (a / "checkpoints" / "ckpt_000001.bin").string());
  EXPECT_EQ(read_lines(a / "metrics.csv"), full);
}

TEST(TrainerTest, ResumeRejectsDifferentConfig) {
  TrainConfig c = point_mass_config();
  c.iterations = 1;
  const fs::path a = scratch_dir("resume_cfg");
  train::train(c, a.string());
  c.ppo.gamma = 0.9;
  Trainer t(c);
  EXPECT_THROW(t.load_checkpoint((a / "checkpoints" / "ckpt_000001.bin").string()), ConfigError);
}

TEST(TrainerTest, LoadPolicyMatchesTrainer) {
  TrainConfig c = small_biped_config();
  c.iterations = 2;
  const fs::path a = scratch_dir("policy");
  train::train(c, a.string());
  Trainer t(c);
  t.iterate();
  t.iterate();
  const auto [cfg, snap] = load_policy((a / "checkpoints" / "ckpt_000002.bin").string());
  EXPECT_EQ(config_hash(cfg), config_hash(c));
  EXPECT_EQ(snap.ac.flat(), t.actor_critic().flat());
  ASSERT_TRUE(snap.him.has_value());
  const Vector obs = t.env(0).observation(), hist = t.env(0).history();
  EXPECT_EQ(snap.policy_input(obs, hist), t.snapshot().policy_input(obs, hist));
}

TEST(TrainerTest, PointMassLearnsToTrack) {
  TrainConfig c = point_mass_config();
  c.num_envs = 64;
  c.horizon = 24;
  Trainer t(c);
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 80; ++it) {
    const auto row = t.iterate();
    for (const auto& [k, v] : row) {
      if (k == "raw_lin_vel_tracking") (it == 0 ? first : last) = v;
    }
  }
  EXPECT_GT(last, first);
  EXPECT_GT(last, 0.85);
}
