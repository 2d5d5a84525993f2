#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace amphim::eval {

struct ScheduleSegment {
  double v_cmd = 0.0;
  double duration = 0.0;  // s
};

/// Abrupt sweep over [-0.5, 0.75] m/s, 5 s per segment.
std::vector<ScheduleSegment> default_schedule();

/// Anything that can be driven with a held velocity command.
class TrackingAgent {
 public:
  virtual ~TrackingAgent() = default;
  virtual double dt() const = 0;
  virtual void reset(std::uint64_t seed) = 0;
  /// Advances one control step under `v_cmd` and returns the realised forward velocity.
  virtual double step(double v_cmd) = 0;
  virtual int falls() const { return 0; }
};

using AgentFactory = std::function<std::unique_ptr<TrackingAgent>()>;

struct SegmentReport {
  double v_cmd = 0.0;
  double start = 0.0;  // s
  double end = 0.0;
  int steps = 0;
  bool out_of_range = false;
  double mae = 0.0;  // over all episodes
};

struct TrackingReport {
  double dt = 0.0;
  double range_limit = 0.4;
  std::vector<ScheduleSegment> schedule;
  std::vector<double> time;             // step end times, shared by every episode
  std::vector<double> command;          // per step
  std::vector<std::vector<double>> velocity;  // [episode][step]
  std::vector<SegmentReport> segments;
  std::vector<int> falls;  // per episode
  double mae = 0.0;
  double in_range_mae = 0.0;
  double out_of_range_mae = 0.0;
  int in_range_steps = 0;
  int out_of_range_steps = 0;
};

struct TrackingOptions {
  int episodes = 20;
  std::uint64_t seed = 1;
  double range_limit = 0.4;  // |v_cmd| above this counts as outside the clip range
  int threads = 0;           // 0: OpenMP default
};

/// Runs every episode against a fresh agent seeded with `seed + episode`.
TrackingReport tracking_sweep(const AgentFactory& make_agent, const std::vector<ScheduleSegment>& schedule,
                              const TrackingOptions& opts = {});

/// MAE over the report's own series (all episodes, all steps).
double series_mae(const TrackingReport& r);

/// Long format: episode, step, time, v_cmd, v, abs_error, out_of_range.
void write_tracking_csv(const TrackingReport& r, const std::string& path);
/// One row per segment plus overall, in-range and out-of-range summaries.
void write_tracking_summary_csv(const TrackingReport& r, const std::string& path);

}  // namespace amphim::eval
