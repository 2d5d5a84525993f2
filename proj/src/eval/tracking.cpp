#include "amphim/eval/tracking.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <omp.h>

#include "amphim/io/csv.hpp"

namespace amphim::eval {

std::vector<ScheduleSegment> default_schedule() {
  std::vector<ScheduleSegment> s;
  for (double v : {-0.5, -0.2, 0.2, 0.5, 0.75, 0.0}) s.push_back({v, 5.0});
  return s;
}

TrackingReport tracking_sweep(const AgentFactory& make_agent, const std::vector<ScheduleSegment>& schedule,
                              const TrackingOptions& opts) {
  if (schedule.empty()) throw std::invalid_argument("tracking: empty schedule");
  if (opts.episodes < 1) throw std::invalid_argument("tracking: episodes must be >= 1");
  TrackingReport r;
  r.schedule = schedule;
  r.range_limit = opts.range_limit;
  r.dt = make_agent()->dt();
  if (!(r.dt > 0.0)) throw std::invalid_argument("tracking: agent dt must be > 0");

  int step = 0;
  for (const auto& seg : schedule) {
    const int n = static_cast<int>(std::lround(seg.duration / r.dt));
    if (n < 1) throw std::invalid_argument("tracking: segment shorter than one control step");
    SegmentReport sr;
    sr.v_cmd = seg.v_cmd;
    sr.start = step * r.dt;
    sr.steps = n;
    sr.out_of_range = std::abs(seg.v_cmd) > opts.range_limit;
    for (int k = 0; k < n; ++k) {
      ++step;
      r.time.push_back(step * r.dt);
      r.command.push_back(seg.v_cmd);
    }
    sr.end = step * r.dt;
    r.segments.push_back(sr);
  }

  const int episodes = opts.episodes;
  r.velocity.assign(static_cast<std::size_t>(episodes), {});
  r.falls.assign(static_cast<std::size_t>(episodes), 0);
  std::vector<std::string> errors(static_cast<std::size_t>(episodes));
  const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int e = 0; e < episodes; ++e) {
    try {
      auto agent = make_agent();
      agent->reset(opts.seed + static_cast<std::uint64_t>(e));
      auto& v = r.velocity[static_cast<std::size_t>(e)];
      v.reserve(r.command.size());
      for (double c : r.command) v.push_back(agent->step(c));
      r.falls[static_cast<std::size_t>(e)] = agent->falls();
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(e)] = ex.what();
    }
  }
  for (const auto& err : errors) {
    if (!err.empty()) throw std::runtime_error("tracking: " + err);
  }

  double in_sum = 0.0, out_sum = 0.0;
  std::size_t offset = 0;
  for (auto& seg : r.segments) {
    double sum = 0.0;
    for (const auto& v : r.velocity) {
      for (int k = 0; k < seg.steps; ++k) sum += std::abs(r.command[offset + k] - v[offset + k]);
    }
    seg.mae = sum / (static_cast<double>(seg.steps) * episodes);
    (seg.out_of_range ? out_sum : in_sum) += sum;
    (seg.out_of_range ? r.out_of_range_steps : r.in_range_steps) += seg.steps;
    offset += static_cast<std::size_t>(seg.steps);
  }
  r.mae = series_mae(r);
  r.in_range_mae = r.in_range_steps ? in_sum / (static_cast<double>(r.in_range_steps) * episodes) : 0.0;
  r.out_of_range_mae = r.out_of_range_steps ? out_sum / (static_cast<double>(r.out_of_range_steps) * episodes) : 0.0;
  return r;
}

double series_mae(const TrackingReport& r) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : r.velocity) {
    for (std::size_t k = 0; k < v.size(); ++k) sum += std::abs(r.command[k] - v[k]);
    n += v.size();
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

void write_tracking_csv(const TrackingReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "episode,step,time,v_cmd,v,abs_error,out_of_range\n";
  for (std::size_t e = 0; e < r.velocity.size(); ++e) {
    for (std::size_t k = 0; k < r.command.size(); ++k) {
      const double v = r.velocity[e][k], c = r.command[k];
      out << e << ',' << k << ',' << io::format_double(r.time[k]) << ',' << io::format_double(c) << ','
          << io::format_double(v) << ',' << io::format_double(std::abs(c - v)) << ','
          << (std::abs(c) > r.range_limit ? 1 : 0) << '\n';
    }
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_tracking_summary_csv(const TrackingReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "segment,v_cmd,start,end,steps,out_of_range,mae\n";
  for (std::size_t i = 0; i < r.segments.size(); ++i) {
    const auto& s = r.segments[i];
    out << i << ',' << io::format_double(s.v_cmd) << ',' << io::format_double(s.start) << ','
        << io::format_double(s.end) << ',' << s.steps << ',' << (s.out_of_range ? 1 : 0) << ','
        << io::format_double(s.mae) << '\n';
  }
  out << "all,,,," << r.in_range_steps + r.out_of_range_steps << ",," << io::format_double(r.mae) << '\n';
  out << "in_range,,,," << r.in_range_steps << ",0," << io::format_double(r.in_range_mae) << '\n';
  out << "out_of_range,,,," << r.out_of_range_steps << ",1," << io::format_double(r.out_of_range_mae) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace amphim::eval
