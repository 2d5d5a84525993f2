#include <CLI11.hpp>

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "amphim/adversary/losses.hpp"
#include "amphim/adversary/mixture.hpp"
#include "amphim/cli/run.hpp"
#include "amphim/curiosity/hashing.hpp"
#include "amphim/eval/ablation.hpp"
#include "amphim/eval/dtw.hpp"
#include "amphim/eval/him_probe.hpp"
#include "amphim/eval/policy_agent.hpp"
#include "amphim/eval/tracking.hpp"
#include "amphim/him/estimator.hpp"
#include "amphim/io/csv.hpp"
#include "amphim/motion/kinematics.hpp"
#include "amphim/motion/retarget.hpp"
#include "amphim/sim/rewards.hpp"
#include "amphim/train/ppo.hpp"
#include "amphim/train/trainer.hpp"

#ifndef AMPHIM_ACCEPTANCE_ROOT
#define AMPHIM_ACCEPTANCE_ROOT "acceptance_runs"
#endif

using namespace amphim;
namespace fs = std::filesystem;
using nn::Matrix;
using nn::Mlp;
using nn::Vector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path root;
  std::ostream* log = nullptr;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

Matrix randn(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

// ---------------------------------------------------------------- 1. rewards

struct RewardCase {
  sim::SimState state, prev;
  sim::Command cmd;
  sim::ActionHistory actions;
};

std::array<double, 6> reward_oracle(const RewardCase& c, double f_max, double dt) {
  std::array<double, 6> r{};
  for (int f = 0; f < sim::kNumFeet; ++f) {
    if (c.state.foot_contact[f]) r[0] += std::abs(c.state.foot_vel[f](0));
    const double mag = std::hypot(c.state.foot_force[f](0), c.state.foot_force[f](1));
    r[1] += mag > f_max ? mag - f_max : 0.0;
  }
  const double dvx = c.cmd.lin_vel_x - c.state.base_lin_vel(0);
  r[2] = std::exp(-4.0 * (dvx * dvx + c.cmd.lin_vel_y * c.cmd.lin_vel_y));
  r[3] = std::exp(-4.0 * c.cmd.yaw_rate * c.cmd.yaw_rate);
  const double ax = (c.state.base_lin_vel(0) - c.prev.base_lin_vel(0)) / dt;
  const double az = (c.state.base_lin_vel(1) - c.prev.base_lin_vel(1)) / dt;
  const double a = std::sqrt(ax * ax + az * az);
  r[4] = std::exp(-a * a * a);
  for (int j = 0; j < sim::kNumJoints; ++j) {
    const double d = c.actions[0](j) - 2.0 * c.actions[1](j) + c.actions[2](j);
    r[5] += d * d;
  }
  return r;
}

std::vector<RewardCase> reward_cases(double f_max) {
  std::vector<RewardCase> cases;
  RewardCase base;
  for (auto& a : base.actions) a.setZero();
  cases.push_back(base);  // everything at rest

  RewardCase c = base;
  c.cmd.lin_vel_x = 0.5;  // |v_cmd - v| = 0.5
  cases.push_back(c);

  c = base;
  c.state.foot_contact = {true, false};
  c.state.foot_vel[0] = {0.3, -0.1};
  c.state.foot_vel[1] = {2.0, 0.0};  // airborne foot does not slip
  cases.push_back(c);

  c = base;
  c.state.foot_force[0] = {0.0, f_max};  // exactly at the limit
  c.state.foot_force[1] = {30.0, f_max};
  cases.push_back(c);

  c = base;
  for (auto& a : c.actions) a << 0.1, -0.2, 0.3, -0.4;  // constant actions
  cases.push_back(c);

  c = base;
  c.prev.base_lin_vel = {0.0, 0.0};
  c.state.base_lin_vel = {0.02, 0.0};  // 1 m/s^2
  cases.push_back(c);

  c = base;
  c.cmd = {-0.5, 0.0, 0.0};
  c.state.base_lin_vel = {0.75, 0.05};
  c.prev.base_lin_vel = {0.8, -0.05};
  cases.push_back(c);

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (cases.size() < 50) {
    RewardCase r = base;
    const int k = static_cast<int>(cases.size());
    r.state.foot_contact = {(k & 1) != 0, (k & 2) != 0};
    for (int f = 0; f < sim::kNumFeet; ++f) {
      r.state.foot_vel[f] = {u(rng), 0.3 * u(rng)};
      r.state.foot_force[f] = {0.2 * f_max * u(rng), f_max * (1.0 + 0.5 * u(rng))};
    }
    r.state.base_lin_vel = {u(rng), 0.2 * u(rng)};
    r.prev.base_lin_vel = r.state.base_lin_vel + Eigen::Vector2d(0.05 * u(rng), 0.05 * u(rng));
    r.cmd.lin_vel_x = 0.75 * u(rng) + 0.25;
    for (auto& a : r.actions) a = sim::JointVector::NullaryExpr([&] { return u(rng); });
    cases.push_back(r);
  }
  return cases;
}

Outcome criterion_rewards(const Context&) {
  const sim::RewardWeights w;
  const std::array<double, 6> expected{-0.05, -0.01, 2.4, 1.1, 0.2, -0.01};
  if (w.as_array() != expected) return {false, "default weights differ from the reward table"};
  const sim::SimConfig sc;
  sim::RewardContext ctx;
  ctx.control_dt = sc.control_dt();
  ctx.max_contact_force = sc.max_contact_force_factor * sim::RobotMorphology{}.total_mass() * sc.gravity;
  double worst = 0.0;
  const auto cases = reward_cases(ctx.max_contact_force);
  for (const auto& c : cases) {
    const sim::RewardBreakdown got = sim::task_rewards(c.state, c.prev, c.cmd, c.actions, w, ctx);
    const auto want = reward_oracle(c, ctx.max_contact_force, ctx.control_dt);
    double total = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      worst = std::max(worst, std::abs(got.terms[i].raw - want[i]));
      worst = std::max(worst, std::abs(got.terms[i].weighted - expected[i] * want[i]));
      total += expected[i] * want[i];
    }
    worst = std::max(worst, std::abs(got.total - total));
  }
  const bool exp1 = std::abs(reward_oracle(cases[1], ctx.max_contact_force, ctx.control_dt)[2] - std::exp(-1.0)) < 1e-15;
  return {worst <= 1e-12 && exp1, std::to_string(cases.size()) + " states, max abs error " + fmt(worst)};
}

// ---------------------------------------------------------------- 2. curiosity

Outcome criterion_curiosity(const Context&) {
  curiosity::CuriosityConfig cfg;
  cfg.bits = 6;  // small code space so visits repeat
  cfg.warmup_steps = 64;
  curiosity::CuriosityModule module(cfg, 17);
  std::mt19937_64 rng(3);
  module.rewards(randn(curiosity::kFeatureDim, 64, rng));
  if (module.warming_up()) return {false, "module still warming up"};

  // Scripted tour: 40 places visited in a fixed pattern with revisits.
  const Matrix places = randn(curiosity::kFeatureDim, 40, rng);
  Matrix visits(curiosity::kFeatureDim, 1000);
  for (int t = 0; t < 1000; ++t) visits.col(t) = places.col((t * 7 + t / 13) % 40);
  std::vector<curiosity::HashCode> codes;
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const double r = module.rewards(visits.col(t))[0];
    const curiosity::HashCode c = module.hasher().hash(visits.col(t));
    codes.push_back(c);
    const auto n = static_cast<double>(std::count(codes.begin(), codes.end(), c));
    if (r != 1.0 / std::sqrt(n)) ++mismatches;
  }

  std::vector<curiosity::CountTable> shards(8);
#pragma omp parallel for num_threads(8) schedule(static)
  for (int t = 0; t < 1000; ++t) {
    shards[static_cast<std::size_t>(omp_get_thread_num())].observe(codes[static_cast<std::size_t>(t)]);
  }
  curiosity::CountTable merged;
  std::uint64_t shard_total = 0;
  for (const auto& s : shards) {
    shard_total += s.total();
    merged.merge(s);
  }
  const bool conserved = shard_total == 1000 && merged.counts() == module.table().counts();
  return {mismatches == 0 && conserved, std::to_string(mismatches) + " reward mismatches over 1000 visits, " +
                                            std::to_string(module.table().distinct()) + " distinct codes, shard total " +
                                            std::to_string(shard_total)};
}

// ---------------------------------------------------------------- 3. gradients

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

/// Central differences over a flat parameter vector; near-zero pairs are skipped.
double max_rel_error(Vector p, const Vector& grad, const std::function<double(const Vector&)>& loss,
                     Eigen::Index begin = 0, Eigen::Index end = -1) {
  const double h = 1e-6;
  if (end < 0) end = p.size();
  double worst = 0.0;
  for (Eigen::Index i = begin; i < end; ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double up = loss(p);
    p[i] = saved - h;
    const double down = loss(p);
    p[i] = saved;
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(grad[i]) < 1e-7) continue;
    worst = std::max(worst, rel_err(fd, grad[i]));
  }
  return worst;
}

Outcome criterion_gradients(const Context&) {
  std::mt19937_64 rng(11);
  std::vector<std::pair<std::string, double>> errors;

  // PPO terms through a 2x16 actor and critic.
  train::PpoConfig pc;
  pc.actor_hidden = {16, 16};
  pc.critic_hidden = {16, 16};
  train::ActorCritic ac(6, 8, 3, pc, rng);
  ac.actor().init(rng, 1.0);
  train::PpoBatch b;
  b.policy_in = randn(6, 16, rng);
  b.critic_in = randn(8, 16, rng);
  b.actions = ac.mean(b.policy_in) + randn(3, 16, rng, 0.3);
  b.old_log_prob = train::gaussian_log_prob(ac.mean(b.policy_in), ac.log_std(), b.actions) + randn(16, 1, rng, 0.2);
  b.advantages = randn(16, 1, rng);
  b.returns = randn(16, 1, rng);
  std::vector<Eigen::Index> cols(16);
  for (int i = 0; i < 16; ++i) cols[static_cast<std::size_t>(i)] = i;
  const auto ppo_term = [&](const std::string& name, double vc, double ec, bool zero_adv) {
    train::PpoConfig c = pc;
    c.value_coef = vc;
    c.entropy_coef = ec;
    train::PpoBatch bb = b;
    if (zero_adv) bb.advantages.setZero();
    train::ActorCritic net = ac;
    Vector g;
    train::ppo_loss(net, bb, cols, c, &g);
    const double e = max_rel_error(net.flat(), g, [&](const Vector& p) {
      net.set_flat(p);
      return train::ppo_loss(net, bb, cols, c, nullptr).total;
    });
    errors.emplace_back(name, e);
  };
  ppo_term("surrogate", 0.0, 0.0, false);
  ppo_term("value", 1.0, 0.0, true);
  ppo_term("entropy", 0.0, 1.0, true);

  // Discriminator losses through a 2x16 critic.
  Mlp d(nn::make_spec(5, {16, 16}, 1, nn::Activation::tanh));
  d.init(rng);
  const Matrix real = randn(5, 8, rng), fake = randn(5, 8, rng, 0.5), xhat = randn(5, 8, rng);
  {
    Mlp m = d;
    const Vector g = adversary::lsgan_loss(m, real, fake).grad;
    errors.emplace_back("lsgan", max_rel_error(m.params(), g, [&](const Vector& p) {
                          m.params() = p;
                          return adversary::lsgan_loss(m, real, fake).loss;
                        }));
  }
  double wgan = 0.0;
  for (auto act : {nn::Activation::tanh, nn::Activation::elu}) {
    Mlp m(nn::make_spec(5, {16, 16}, 1, act));
    m.init(rng);
    const adversary::LossResult r = adversary::wgan_div_loss_at(m, real, fake, xhat, 2.0, 6.0);
    if (!(r.penalty > 0.0)) return {false, "wgan_div penalty path inactive"};
    wgan = std::max(wgan, max_rel_error(m.params(), r.grad, [&](const Vector& p) {
                      m.params() = p;
                      return adversary::wgan_div_loss_at(m, real, fake, xhat, 2.0, 6.0).loss;
                    }));
  }
  errors.emplace_back("wgan_div", wgan);

  // Estimator losses through a 2x16 trunk.
  him::HimConfig hc;
  hc.history = 3;
  hc.obs_dim = 4;
  hc.latent_dim = 5;
  hc.hidden = {16, 16};
  const Matrix x = randn(12, 8, rng), xn = randn(12, 8, rng), v = randn(3, 8, rng);
  {
    him::HimConfig c = hc;
    c.contrastive_weight = 0.0;
    him::HimEstimator est(c, rng);
    Vector g = Vector::Zero(est.trainable().size());
    est.loss(x, xn, v, &g);
    errors.emplace_back("velocity_mse", max_rel_error(est.trainable(), g, [&](const Vector& p) {
                          est.set_trainable(p);
                          return est.loss(x, xn, v, nullptr).velocity_loss;
                        }));
  }
  {
    him::HimConfig c = hc;
    c.velocity_weight = 0.0;
    him::HimEstimator est(c, rng);
    Vector g = Vector::Zero(est.trainable().size());
    est.loss(x, xn, v, &g);
    // Targets are stop-gradient, so differences hold them fixed.
    const Matrix targets = est.targets(xn);
    errors.emplace_back("infonce", max_rel_error(est.trainable(), g, [&](const Vector& p) {
                          est.set_trainable(p);
                          return him::contrastive_loss(est.encode_batch(x).z, targets, c.temperature);
                        }));
  }

  std::string detail;
  bool pass = true;
  for (const auto& [name, e] : errors) {
    const double tol = name == "wgan_div" ? 1e-3 : 1e-4;
    pass = pass && e <= tol;
    detail += (detail.empty() ? "" : ", ") + name + " " + fmt(e, 2);
  }
  return {pass && errors.size() == 7, "max rel error: " + detail};
}

// ---------------------------------------------------------------- 4. DTW

Outcome criterion_dtw(const Context&) {
  const auto all = oracle::all_sequences(6, {0.0, 1.0, 2.0});
  long long pairs = 0, mismatches = 0, asym = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (eval::dtw(all[i], all[i]).distance != 0.0) ++mismatches;
    for (std::size_t j = 0; j < all.size(); ++j) {
      const double d = eval::dtw(all[i], all[j]).distance;
      if (std::abs(d - oracle::dtw_brute_force(all[i], all[j])) > 1e-12) ++mismatches;
      if (j > i && d != eval::dtw(all[j], all[i]).distance) ++asym;
      ++pairs;
    }
  }
  return {mismatches == 0 && asym == 0, std::to_string(pairs) + " pairs, " + std::to_string(mismatches) +
                                            " oracle mismatches, " + std::to_string(asym) + " asymmetric"};
}

// ---------------------------------------------------------------- 5. IK

Outcome criterion_ik(const Context&) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const sim::RobotMorphology morph;
  const double l1 = morph.thigh_length, l2 = morph.shank_length;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double lo = std::abs(l1 - l2) + 1e-6, hi = l1 + l2 - 1e-6;
    const double r = lo + (hi - lo) * u(rng);
    const double ang = 2.0 * M_PI * u(rng);
    const motion::Vec2 hip(u(rng) - 0.5, 0.3 + u(rng));
    const motion::Vec2 target = hip + r * motion::Vec2(std::cos(ang), std::sin(ang));
    const motion::LegAngles a = motion::ik_two_link(hip, target, l1, l2);
    worst = std::max(worst, (motion::fk_two_link(hip, a, l1, l2) - target).norm());
  }
  double mirror = 0.0;
  const auto clips = motion::default_clips(morph);
  for (const auto& c : clips) mirror = std::max(mirror, motion::half_period_mirror_error(c));
  return {worst < 1e-9 && mirror < 1e-3, "FK(IK) residual " + fmt(worst) + " m over 10000 targets; worst mirror error " +
                                             fmt(mirror) + " rad over " + std::to_string(clips.size()) + " clips"};
}

// ---------------------------------------------------------------- 6. modes

Outcome criterion_modes(const Context& ctx) {
  const adversary::MixtureConfig cfg;
  std::vector<double> lsgan, wgan;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    lsgan.push_back(adversary::run_mixture(adversary::Criterion::lsgan, cfg, seed).modes_recovered);
    wgan.push_back(adversary::run_mixture(adversary::Criterion::wgan_div, cfg, seed).modes_recovered);
    if (ctx.log) *ctx.log << "  seed " << seed << ": lsgan " << lsgan.back() << ", wgan_div " << wgan.back() << '\n';
  }
  const double ml = eval::median(lsgan), mw = eval::median(wgan);
  return {mw >= ml, "median modes recovered: wgan_div " + fmt(mw) + ", lsgan " + fmt(ml) + " (of " +
                        std::to_string(cfg.modes) + ")"};
}

// ---------------------------------------------------------------- 7. PPO smoke

Outcome criterion_ppo(const Context& ctx) {
  std::string detail;
  bool pass = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const train::TrainConfig cfg = train::load_config({"point_mass"}, {"train.seed=" + std::to_string(seed)});
    if (cfg.iterations != 300) return {false, "point_mass preset budget is not 300 iterations"};
    const fs::path dir = ctx.root / "ppo_smoke" / ("s" + std::to_string(seed));
    cli::train_run(cfg, dir.string(), ctx.log, 100);
    const io::NumericTable m = io::read_numeric_csv((dir / "metrics.csv").string());
    if (m.rows.size() != 300) return {false, dir.string() + ": expected 300 metrics rows"};
    // Mean over the last 10 iterations of the budget.
    const double track = eval::windowed_stats(m, "raw_lin_vel_tracking", 10).mean;
    pass = pass && track >= 0.9;
    detail += (detail.empty() ? "" : ", ") + ("seed " + std::to_string(seed) + " " + fmt(track));
  }
  return {pass, "lin-tracking raw reward at iteration 300: " + detail};
}

// ---------------------------------------------------------------- 8-10. desk runs

cli::AblationRequest desk_request() {
  cli::AblationRequest req;
  req.arms = {"amp", "amp_him", "ampw_him", "ampw_him_plus"};
  req.seeds = 3;
  req.base_configs = {"desk"};
  req.ablation_dir = cli::ablation_dir(req);
  return req;
}

std::string desk_cell(const Context& ctx, const std::string& arm, int seed_index) {
  const cli::AblationRequest req = desk_request();
  const train::TrainConfig cfg = cli::cell_config(req, arm, seed_index);
  const fs::path dir = fs::path(req.ablation_dir) / (arm + "-s" + std::to_string(cfg.seed));
  return cli::train_run(cfg, dir.string(), ctx.log, 250).final_checkpoint;
}

Outcome criterion_him(const Context& ctx) {
  const std::string ckpt = desk_cell(ctx, "amp_him", 0);
  const eval::LoadedPolicy p = eval::load_checkpoint_policy(ckpt);
  const eval::HimProbeReport r = eval::him_probe(p);
  const bool pass = r.velocity_mae < 0.5 * r.zero_mae && r.probe_test_accuracy >= 0.8;
  return {pass, "held-out velocity MAE " + fmt(r.velocity_mae) + " vs zero-predictor " + fmt(r.zero_mae) +
                    "; walk/run probe accuracy " + fmt(r.probe_test_accuracy) + " (" + std::to_string(r.samples) +
                    " states)"};
}

Outcome criterion_ablation(const Context& ctx) {
  const eval::AblationTable t = cli::ablate(desk_request(), ctx.log);
  std::string detail;
  for (const auto& a : t.arms) {
    detail += (detail.empty() ? "" : ", ") + a.arm + " " + fmt(a.median) + "±" + fmt(a.std, 2);
  }
  bool ordered = t.checks.size() == 2;
  for (const auto& c : t.checks) ordered = ordered && c.evaluated && c.pass;
  return {ordered, "median windowed return: " + detail};
}

Outcome criterion_tracking(const Context& ctx) {
  const auto schedule = eval::default_schedule();
  double horizon = 0.0;
  for (const auto& s : schedule) horizon += s.duration;
  std::vector<std::pair<std::string, std::string>> runs;
  for (int s = 0; s < 3; ++s) {
    for (const char* arm : {"amp", "amp_him"}) runs.emplace_back(arm, desk_cell(ctx, arm, s));
  }
  // Training time belongs to criterion 9; the evaluation itself has its own budget.
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> amp, him;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& [arm, ckpt] = runs[i];
    const int s = static_cast<int>(i / 2);
    {
      const eval::LoadedPolicy p = eval::load_checkpoint_policy(ckpt);
      eval::TrackingOptions opts;
      opts.episodes = 20;
      opts.seed = 1000;
      const eval::TrackingReport r = eval::tracking_sweep(eval::agent_factory(p, horizon), schedule, opts);
      eval::write_tracking_csv(r, (fs::path(cli::run_dir_of(ckpt)) / "tracking_report.csv").string());
      eval::write_tracking_summary_csv(r, (fs::path(cli::run_dir_of(ckpt)) / "tracking_summary.csv").string());
      (arm == "amp" ? amp : him).push_back(r.out_of_range_mae);
      if (ctx.log) {
        *ctx.log << "  " << arm << " seed " << s + 1 << ": out-of-range MAE " << r.out_of_range_mae << ", in-range "
                 << r.in_range_mae << '\n';
      }
    }
  }
  const double eval_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double ma = eval::median(amp), mh = eval::median(him);
  return {mh < ma && eval_s < 600.0, "median out-of-range MAE: amp_him " + fmt(mh) + " m/s, amp " + fmt(ma) +
                                         " m/s; evaluation " + fmt(eval_s, 3) + " s of 600 s"};
}

// ---------------------------------------------------------------- 11. determinism

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion_determinism(const Context& ctx) {
  train::TrainConfig cfg = train::load_config(
      {"ampw_him_plus"}, {"train.num_envs=16", "train.iterations=20", "train.checkpoint_every=5", "train.workers=1",
                          "ppo.actor_hidden=32,32", "ppo.critic_hidden=32,32", "him.hidden=32,32",
                          "style.hidden=32,32", "style.batch=128", "curiosity.warmup_steps=1000", "train.seed=7"});
  const fs::path base = ctx.root / "determinism";
  fs::remove_all(base);
  const fs::path a = base / "a", b = base / "b", c = base / "c";
  train::train(cfg, a.string());
  train::train(cfg, b.string());
  const bool same_metrics = read_file(a / "metrics.csv") == read_file(b / "metrics.csv");
  const bool same_ckpt = read_file(a / "checkpoints" / "ckpt_000020.bin") == read_file(b / "checkpoints" / "ckpt_000020.bin");
  train::train(cfg, c.string(), (a / "checkpoints" / "ckpt_000010.bin").string());
  const io::NumericTable ta = io::read_numeric_csv((a / "metrics.csv").string());
  const io::NumericTable tc = io::read_numeric_csv((c / "metrics.csv").string());
  bool resumed = tc.rows.size() == 10;
  for (std::size_t i = 0; resumed && i < tc.rows.size(); ++i) {
    const auto& x = ta.rows[10 + i];
    const auto& y = tc.rows[i];
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (!(x[k] == y[k] || (std::isnan(x[k]) && std::isnan(y[k])))) resumed = false;
    }
  }
  const bool same_resumed_ckpt =
      read_file(a / "checkpoints" / "ckpt_000020.bin") == read_file(c / "checkpoints" / "ckpt_000020.bin");
  return {same_metrics && same_ckpt && resumed && same_resumed_ckpt,
          std::string("two seeded runs: metrics ") + (same_metrics ? "identical" : "differ") + ", final checkpoint " +
              (same_ckpt ? "identical" : "differs") + "; resume from iteration 10: rows 11-20 " +
              (resumed ? "identical" : "differ") + ", final checkpoint " + (same_resumed_ckpt ? "identical" : "differs")};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  std::string root = AMPHIM_ACCEPTANCE_ROOT;
  bool verbose = false;
  app.add_option("--only", only, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 11));
  app.add_option("--root", root, "Directory for training runs (reused between invocations)");
  app.add_flag("-v,--verbose", verbose, "Progress output on stderr");
  CLI11_PARSE(app, argc, argv);

  Context ctx{fs::absolute(root), verbose ? &std::cerr : nullptr};
  fs::create_directories(ctx.root);
  setenv("AMPHIM_RUN_ROOT", ctx.root.c_str(), 1);

  const std::vector<Criterion> criteria{
      {1, "reward formulas", 1, criterion_rewards},
      {2, "curiosity counts", 5, criterion_curiosity},
      {3, "gradient suite", 120, criterion_gradients},
      {4, "dtw oracle", 30, criterion_dtw},
      {5, "ik round trip", 10, criterion_ik},
      {6, "mode coverage", 600, criterion_modes},
      {7, "ppo smoke", 600, criterion_ppo},
      {8, "estimator properties", 1800, criterion_him},
      {9, "ablation ordering", 4 * 3600, criterion_ablation},
      {10, "tracking proxy", 4 * 3600 + 600, criterion_tracking},
      {11, "determinism and resume", 300, criterion_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.limit_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << "CRITERION " << c.id << " " << (pass ? "PASS" : "FAIL") << " [" << c.name << "] " << o.detail << " ("
              << fmt(s, 3) << " s, limit " << c.limit_s << " s" << (in_time ? "" : ", over time") << ")"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
