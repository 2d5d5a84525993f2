#include "amphim/cli/run.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "amphim/eval/dtw.hpp"
#include "amphim/eval/him_probe.hpp"
#include "amphim/eval/policy_agent.hpp"
#include "amphim/eval/style_stats.hpp"
#include "amphim/eval/tracking.hpp"
#include "amphim/io/csv.hpp"
#include "amphim/motion/clip_io.hpp"
#include "amphim/motion/retarget.hpp"
#include "amphim/train/trainer.hpp"

#ifndef AMPHIM_VERSION
#define AMPHIM_VERSION "unknown"
#endif

namespace amphim::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_manifest(const fs::path& dir) {
  const fs::path p = dir / "manifest.json";
  if (!fs::exists(p)) return json::object();
  try {
    return json::parse(read_file(p));
  } catch (const json::exception&) {
    throw std::runtime_error(p.string() + ": unreadable manifest");
  }
}

void write_manifest(const fs::path& dir, const json& m) {
  const fs::path tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << m.dump(2) << '\n';
    if (!out) throw std::runtime_error(tmp.string() + ": cannot write manifest");
  }
  fs::rename(tmp, dir / "manifest.json");
}

/// Records an artifact path (relative to the run directory) in the manifest.
void add_artifact(const fs::path& dir, const std::string& key, const fs::path& artifact) {
  json m = read_manifest(dir);
  m["artifacts"][key] = fs::relative(artifact, dir).generic_string();
  write_manifest(dir, m);
}

std::string row_value(const MetricsRow& row, const std::string& key) {
  for (const auto& [k, v] : row) {
    if (k == key) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", v);
      return buf;
    }
  }
  return "?";
}

std::string clip_file_name(const motion::MotionClip& clip) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%+.2f.csv", clip.label.c_str(), clip.nominal_speed);
  return buf;
}

}  // namespace

std::string run_root() {
  const char* env = std::getenv("AMPHIM_RUN_ROOT");
  return env && *env ? env : "runs";
}

std::string default_run_id(const std::vector<std::string>& configs, const train::TrainConfig& cfg) {
  const std::string stem = configs.empty() ? "default" : fs::path(configs.back()).stem().string();
  return stem + "-" + train::config_hash(cfg).substr(0, 8);
}

std::string latest_checkpoint(const std::string& run_dir) {
  const fs::path dir = fs::path(run_dir) / "checkpoints";
  if (!fs::is_directory(dir)) return "";
  static const std::regex pattern(R"(ckpt_(\d+)\.bin)");
  long long best = -1;
  std::string path;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, pattern) && std::stoll(m[1]) > best) {
      best = std::stoll(m[1]);
      path = e.path().string();
    }
  }
  return path;
}

std::string run_dir_of(const std::string& checkpoint) {
  const fs::path parent = fs::path(checkpoint).parent_path();
  if (parent.filename() == "checkpoints") return parent.parent_path().string();
  return parent.empty() ? std::string(".") : parent.string();
}

RunOutcome train_run(const train::TrainConfig& cfg, const std::string& run_dir, std::ostream* log, int log_every) {
  const fs::path dir(run_dir);
  RunOutcome out;
  out.run_dir = run_dir;
  std::string resume;
  if (fs::exists(dir / "config.cfg")) {
    train::TrainConfig existing;
    train::apply_text(existing, read_file(dir / "config.cfg"), (dir / "config.cfg").string());
    existing.workers = cfg.workers;
    if (train::canonical_text(existing) != train::canonical_text(cfg)) {
      throw std::runtime_error(run_dir + ": run directory holds a different config");
    }
    resume = latest_checkpoint(run_dir);
  }
  json manifest = read_manifest(dir);
  if (!resume.empty()) {
    const auto [saved, snap] = train::load_policy(resume);
    (void)saved;
    (void)snap;
    const std::string name = fs::path(resume).stem().string();
    const long long at = std::stoll(name.substr(5));
    if (at >= cfg.iterations && manifest.value("status", "") == "complete") {
      out.final_checkpoint = resume;
      return out;
    }
    out.resumed = true;
  }
  fs::create_directories(dir);
  manifest["run_id"] = dir.filename().string();
  manifest["config_hash"] = train::config_hash(cfg);
  manifest["parity_hash"] = train::parity_hash(cfg);
  manifest["seed"] = cfg.seed;
  if (!manifest.contains("start_time")) manifest["start_time"] = utc_now();
  manifest["code_version"] = AMPHIM_VERSION;
  manifest["status"] = "running";
  write_manifest(dir, manifest);

  const auto t0 = std::chrono::steady_clock::now();
  const auto progress = [&](const MetricsRow& row) {
    if (!log) return;
    const double it = row.front().second;
    if (static_cast<long long>(it) % log_every != 0 && static_cast<long long>(it) != cfg.iterations) return;
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    *log << dir.filename().string() << " iter " << static_cast<long long>(it) << "/" << cfg.iterations
         << " task=" << row_value(row, "task_reward_mean") << " style=" << row_value(row, "style_reward_mean")
         << " track=" << row_value(row, "raw_lin_vel_tracking") << " t=" << static_cast<long long>(s) << "s\n"
         << std::flush;
  };
  const train::TrainResult r = train::train(cfg, run_dir, resume, progress);
  out.iterations_run = r.iterations_run;
  out.final_checkpoint = latest_checkpoint(run_dir);

  manifest = read_manifest(dir);
  manifest["status"] = "complete";
  manifest["end_time"] = utc_now();
  manifest["artifacts"]["config"] = "config.cfg";
  manifest["artifacts"]["metrics"] = "metrics.csv";
  json ckpts = json::array();
  for (const auto& e : fs::directory_iterator(dir / "checkpoints")) {
    ckpts.push_back(fs::relative(e.path(), dir).generic_string());
  }
  std::sort(ckpts.begin(), ckpts.end());
  manifest["artifacts"]["checkpoints"] = ckpts;
  write_manifest(dir, manifest);
  return out;
}

train::TrainConfig cell_config(const AblationRequest& req, const std::string& arm, int seed_index) {
  std::vector<std::string> files = req.base_configs;
  files.push_back(arm);
  std::vector<std::string> overrides = req.overrides;
  train::TrainConfig base = train::load_config(files, overrides);
  overrides.push_back("train.seed=" + std::to_string(base.seed + static_cast<std::uint64_t>(seed_index)));
  return train::load_config(files, overrides);
}

std::string ablation_dir(const AblationRequest& req) {
  if (!req.ablation_dir.empty()) return req.ablation_dir;
  std::string key = std::to_string(req.seeds);
  for (const auto& a : req.arms) key += "|" + a + "=" + train::config_hash(cell_config(req, a, 0));
  key += "|" + std::to_string(req.window);
  return (fs::path(run_root()) / ("ablate-" + train::hex64(train::fnv1a(key)).substr(0, 8))).string();
}

eval::AblationTable ablate(const AblationRequest& req, std::ostream* log) {
  if (req.arms.empty()) throw std::invalid_argument("ablate: no arms given");
  if (req.seeds < 1) throw std::invalid_argument("ablate: seeds must be >= 1");
  const fs::path dir = ablation_dir(req);
  fs::create_directories(dir);

  std::vector<train::TrainConfig> cfgs;
  for (const auto& arm : req.arms) cfgs.push_back(cell_config(req, arm, 0));
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    if (train::parity_hash(cfgs[i]) != train::parity_hash(cfgs[0])) {
      throw train::ConfigError("ablate: arm '" + req.arms[i] + "' differs from '" + req.arms[0] +
                               "' outside the toggle keys");
    }
  }

  std::vector<eval::AblationCell> cells;
  for (const auto& arm : req.arms) {
    for (int s = 0; s < req.seeds; ++s) {
      const train::TrainConfig cfg = cell_config(req, arm, s);
      eval::AblationCell cell;
      cell.arm = fs::path(arm).stem().string();
      cell.seed = static_cast<int>(cfg.seed);
      cell.run_dir = (dir / (cell.arm + "-s" + std::to_string(cfg.seed))).string();
      try {
        train_run(cfg, cell.run_dir, log);
      } catch (const std::exception& e) {
        if (log) *log << cell.run_dir << ": " << e.what() << '\n';
      }
      cells.push_back(cell);
    }
  }
  std::vector<std::string> names;
  for (const auto& arm : req.arms) names.push_back(fs::path(arm).stem().string());
  eval::AblationTable table = eval::summarize_ablation(cells, static_cast<int>(cfgs.front().iterations),
                                                       "task_reward_mean", req.window, eval::default_ordering(names));
  if (log) {
    for (const auto& w : table.warnings) *log << "warning: " << w << '\n';
  }
  eval::write_ablation_csv(table, (dir / "ablation_table.csv").string());
  eval::write_ablation_cells_csv(table, (dir / "ablation_cells.csv").string());

  json m = read_manifest(dir);
  m["run_id"] = dir.filename().string();
  m["kind"] = "ablation";
  m["arms"] = names;
  m["seeds"] = req.seeds;
  m["code_version"] = AMPHIM_VERSION;
  if (!m.contains("start_time")) m["start_time"] = utc_now();
  m["artifacts"]["ablation_table"] = "ablation_table.csv";
  m["artifacts"]["ablation_cells"] = "ablation_cells.csv";
  json runs = json::array();
  for (const auto& c : table.cells) runs.push_back(fs::relative(c.run_dir, dir).generic_string());
  m["artifacts"]["runs"] = runs;
  write_manifest(dir, m);
  return table;
}

namespace {

json eval_dtw(const std::string& checkpoint, int episodes, const fs::path& dir) {
  const eval::LoadedPolicy p = eval::load_checkpoint_policy(checkpoint);
  const auto records =
      eval::dtw_against_clips(p, motion::default_clips(sim::RobotMorphology{}), episodes, p.config.seed);
  const fs::path out = dir / "dtw_results.csv";
  eval::write_dtw_csv(records, out.string());
  add_artifact(dir, "dtw_results", out);
  double sum = 0.0;
  for (const auto& r : records) sum += r.distance;
  return {{"suite", "dtw"}, {"csv", out.string()}, {"mean_dtw", sum / static_cast<double>(records.size())}};
}

json eval_tracking(const std::string& checkpoint, int episodes, const fs::path& dir) {
  const eval::LoadedPolicy p = eval::load_checkpoint_policy(checkpoint);
  const auto schedule = eval::default_schedule();
  double horizon = 0.0;
  for (const auto& s : schedule) horizon += s.duration;
  eval::TrackingOptions opts;
  opts.episodes = episodes;
  opts.seed = p.config.seed;
  const eval::TrackingReport r = eval::tracking_sweep(eval::agent_factory(p, horizon), schedule, opts);
  const fs::path out = dir / "tracking_report.csv", summary = dir / "tracking_summary.csv";
  eval::write_tracking_csv(r, out.string());
  eval::write_tracking_summary_csv(r, summary.string());
  add_artifact(dir, "tracking_report", out);
  add_artifact(dir, "tracking_summary", summary);
  int falls = 0;
  for (int f : r.falls) falls += f;
  return {{"suite", "tracking"}, {"csv", out.string()},       {"mae", r.mae},
          {"in_range_mae", r.in_range_mae}, {"out_of_range_mae", r.out_of_range_mae}, {"falls", falls}};
}

json eval_style(const fs::path& dir, int window) {
  const fs::path metrics = dir / "metrics.csv";
  if (!fs::exists(metrics)) throw std::runtime_error("metrics file not found: " + metrics.string());
  const io::NumericTable t = io::read_numeric_csv(metrics.string());
  if (t.rows.empty()) throw std::invalid_argument(metrics.string() + ": no iterations recorded");
  const int last = static_cast<int>(t.rows.back()[t.column("iteration")]);
  const eval::StyleHistogram h = eval::style_histogram(t, std::max(1, last - window + 1), last);
  const fs::path out = dir / "style_histogram.csv";
  eval::write_style_csv(h, out.string());
  add_artifact(dir, "style_histogram", out);
  return {{"suite", "style"}, {"csv", out.string()}, {"mean", h.mean}, {"std", h.std}, {"samples", h.samples}};
}

json eval_him(const std::string& checkpoint, int episodes, const fs::path& dir) {
  const eval::LoadedPolicy p = eval::load_checkpoint_policy(checkpoint);
  eval::HimProbeOptions opts;
  opts.episodes_per_class = episodes;
  const eval::HimProbeReport r = eval::him_probe(p, opts);
  const fs::path out = dir / "him_probe.csv";
  {
    std::ofstream f(out);
    f << "samples,velocity_mae,zero_mae,probe_train_accuracy,probe_test_accuracy\n"
      << r.samples << ',' << io::format_double(r.velocity_mae) << ',' << io::format_double(r.zero_mae) << ','
      << io::format_double(r.probe_train_accuracy) << ',' << io::format_double(r.probe_test_accuracy) << '\n';
    if (!f) throw std::runtime_error(out.string() + ": write failed");
  }
  add_artifact(dir, "him_probe", out);
  return {{"suite", "him"},           {"csv", out.string()},        {"velocity_mae", r.velocity_mae},
          {"zero_mae", r.zero_mae},   {"probe_test_accuracy", r.probe_test_accuracy}};
}

void fail(const std::string& command, const std::string& message, int code) {
  std::cerr << json{{"error", message}, {"command", command}, {"exit_code", code}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial motion prior training with a hybrid internal model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", AMPHIM_VERSION);

  std::vector<std::string> configs, sets;
  std::optional<std::uint64_t> seed;
  std::string run_id;
  auto* train_cmd = app.add_subcommand("train", "Train a policy into <run root>/<run id>");
  train_cmd->add_option("--config", configs, "Config file or preset name; repeat to layer")->take_all();
  train_cmd->add_option("--set", sets, "Override as key=value; repeatable");
  train_cmd->add_option("--seed", seed, "Seed (overrides train.seed)");
  train_cmd->add_option("--run-id", run_id, "Run directory name (default: config stem and hash)");

  std::string checkpoint, suite;
  int episodes = 20, window = 500;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint; CSVs go to its run directory");
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--suite", suite, "dtw, tracking, style or him")
      ->required()
      ->check(CLI::IsMember({"dtw", "tracking", "style", "him"}));
  eval_cmd->add_option("--episodes", episodes, "Rollouts per case")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--window", window, "Style window in iterations")->check(CLI::PositiveNumber);

  AblationRequest req;
  std::string arms_text = "amp,amp_him,ampw_him,ampw_him_plus";
  bool strict = false;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train arms x seeds and tabulate windowed returns");
  ablate_cmd->add_option("--arms", arms_text, "Comma-separated arm presets");
  ablate_cmd->add_option("--seeds", req.seeds, "Seeds per arm")->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--config", req.base_configs, "Base config files or presets")->take_all();
  ablate_cmd->add_option("--set", req.overrides, "Override as key=value; repeatable");
  ablate_cmd->add_option("--window", req.window, "Window in iterations")->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--dir", req.ablation_dir, "Ablation directory (default: under the run root)");
  ablate_cmd->add_flag("--strict", strict, "Exit 3 when an ordering check fails");

  std::string out_dir;
  auto* export_cmd = app.add_subcommand("export-clips", "Write the reference motion clips as CSV");
  export_cmd->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("parse", e.what(), 2);
    return 2;
  }

  std::string command = "unknown";
  try {
    if (*train_cmd) {
      command = "train";
      if (seed) sets.push_back("train.seed=" + std::to_string(*seed));
      const train::TrainConfig cfg = train::load_config(configs, sets);
      const fs::path dir = fs::path(run_root()) / (run_id.empty() ? default_run_id(configs, cfg) : run_id);
      const RunOutcome r = train_run(cfg, dir.string(), &std::cerr);
      std::cout << json{{"command", "train"},
                        {"run_dir", r.run_dir},
                        {"checkpoint", r.final_checkpoint},
                        {"iterations_run", r.iterations_run},
                        {"resumed", r.resumed}}
                       .dump()
                << std::endl;
    } else if (*eval_cmd) {
      command = "eval";
      if (!fs::is_regular_file(checkpoint)) throw std::runtime_error("checkpoint not found: " + checkpoint);
      const fs::path dir = run_dir_of(checkpoint);
      json r;
      if (suite == "dtw") r = eval_dtw(checkpoint, episodes, dir);
      if (suite == "tracking") r = eval_tracking(checkpoint, episodes, dir);
      if (suite == "style") r = eval_style(dir, window);
      if (suite == "him") r = eval_him(checkpoint, episodes, dir);
      r["command"] = "eval";
      r["checkpoint"] = checkpoint;
      std::cout << r.dump() << std::endl;
    } else if (*ablate_cmd) {
      command = "ablate";
      req.arms = io::split(arms_text, ',');
      for (auto& a : req.arms) a = io::trim(a);
      const eval::AblationTable t = ablate(req, &std::cerr);
      json arms = json::array(), checks = json::array();
      for (const auto& s : t.arms) {
        arms.push_back({{"arm", s.arm}, {"complete", s.complete}, {"seeds", s.seeds}, {"median", s.median},
                        {"mean", s.mean}, {"std", s.std}});
      }
      for (const auto& c : t.checks) {
        checks.push_back({{"better", c.better}, {"worse", c.worse}, {"evaluated", c.evaluated}, {"pass", c.pass}});
      }
      std::cout << json{{"command", "ablate"}, {"dir", ablation_dir(req)}, {"arms", arms}, {"checks", checks}}.dump()
                << std::endl;
      if (strict && !t.all_pass()) return 3;
    } else if (*export_cmd) {
      command = "export-clips";
      fs::create_directories(out_dir);
      json files = json::array();
      for (const auto& clip : motion::default_clips(sim::RobotMorphology{})) {
        const fs::path p = fs::path(out_dir) / clip_file_name(clip);
        motion::save_clip(clip, p.string());
        files.push_back(p.string());
      }
      std::cout << json{{"command", "export-clips"}, {"files", files}}.dump() << std::endl;
    }
  } catch (const std::exception& e) {
    fail(command, e.what(), 1);
    return 1;
  }
  return 0;
}

}  // namespace amphim::cli
