#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "amphim/eval/ablation.hpp"
#include "amphim/train/config.hpp"

namespace amphim::cli {

/// Run root: $AMPHIM_RUN_ROOT, or "runs" when unset.
std::string run_root();

/// "<last config stem or default>-<first 8 hex digits of the config hash>".
std::string default_run_id(const std::vector<std::string>& configs, const train::TrainConfig& cfg);

/// Highest-numbered checkpoint under run_dir/checkpoints, or "" when there is none.
std::string latest_checkpoint(const std::string& run_dir);

struct RunOutcome {
  std::string run_dir;
  std::string final_checkpoint;
  std::int64_t iterations_run = 0;
  bool resumed = false;
};

/// Trains into run_dir. A directory already holding this config resumes from its
/// latest checkpoint (nothing to do when it is complete); one holding a different
/// config is an error. Writes manifest.json. Progress goes to `log` when given.
RunOutcome train_run(const train::TrainConfig& cfg, const std::string& run_dir, std::ostream* log = nullptr,
                     int log_every = 50);

/// Run directory owning a checkpoint: the parent of its checkpoints/ folder.
std::string run_dir_of(const std::string& checkpoint);

struct AblationRequest {
  std::vector<std::string> arms;
  int seeds = 3;
  std::vector<std::string> base_configs{"desk"};
  std::vector<std::string> overrides;
  std::string ablation_dir;  // empty: <run root>/<default id>
  int window = 500;
};

/// Trains (or reuses) every arm x seed cell, then writes ablation_table.csv and
/// ablation_cells.csv into the ablation directory.
eval::AblationTable ablate(const AblationRequest& req, std::ostream* log = nullptr);
/// Configs of one ablation cell: base configs, then the arm preset, then overrides and seed.
train::TrainConfig cell_config(const AblationRequest& req, const std::string& arm, int seed_index);
std::string ablation_dir(const AblationRequest& req);

/// Command-line entry point. Failures print one JSON line on stderr and return nonzero.
int main(int argc, char** argv);

}  // namespace amphim::cli
