#include "amphim/motion/clip_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "amphim/io/csv.hpp"

namespace amphim::motion {
namespace {

constexpr const char* kClipMagic = "amphim-clip";
constexpr const char* kKeypointMagic = "amphim-keypoints";
const std::vector<std::string> kClipColumns = {"hip_l",       "knee_l",     "hip_r",     "knee_r",
                                               "base_height", "base_vel_x", "base_vel_z"};
const std::vector<std::string> kKeypointColumns = {"hip_x",     "hip_z",     "knee_l_x",  "knee_l_z",
                                                   "ankle_l_x", "ankle_l_z", "knee_r_x",  "knee_r_z",
                                                   "ankle_r_x", "ankle_r_z"};

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

struct Parsed {
  std::map<std::string, std::string> meta;
  std::vector<std::vector<double>> rows;
};

Parsed parse(const std::string& path, const char* magic, const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  Parsed p;
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) fail(path, 1, "empty file");
  ++lineno;
  {
    std::istringstream hs(line);
    std::string hash, tag, version, kv;
    hs >> hash >> tag >> version;
    if (hash != "#" || tag != magic) fail(path, lineno, std::string("expected '# ") + magic + "' header");
    if (version != "v1") fail(path, lineno, "unsupported version '" + version + "'");
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) fail(path, lineno, "malformed header field '" + kv + "'");
      p.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  if (!std::getline(in, line)) fail(path, lineno + 1, "missing column header");
  ++lineno;
  if (io::trim(line) != join(columns)) fail(path, lineno, "unexpected columns (expected " + join(columns) + ")");

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = io::trim(line);
    if (t.empty()) continue;
    const auto fields = io::split(t, ',');
    if (fields.size() != columns.size()) {
      fail(path, lineno, "expected " + std::to_string(columns.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      try {
        row[k] = io::parse_double(fields[k], columns[k]);
      } catch (const std::invalid_argument& e) {
        fail(path, lineno, e.what());
      }
    }
    p.rows.push_back(std::move(row));
  }

  const auto it = p.meta.find("frames");
  if (it == p.meta.end()) fail(path, 1, "header lacks frames=");
  long long frames = 0;
  try {
    frames = io::parse_int(it->second, "frames");
  } catch (const std::invalid_argument& e) {
    fail(path, 1, e.what());
  }
  if (frames != static_cast<long long>(p.rows.size())) {
    fail(path, lineno, "truncated: header declares " + std::to_string(frames) + " frames, found " +
                           std::to_string(p.rows.size()));
  }
  return p;
}

double meta_double(const Parsed& p, const std::string& path, const std::string& key) {
  const auto it = p.meta.find(key);
  if (it == p.meta.end()) fail(path, 1, "header lacks " + key + "=");
  try {
    return io::parse_double(it->second, key);
  } catch (const std::invalid_argument& e) {
    fail(path, 1, e.what());
  }
}

std::string meta_string(const Parsed& p, const std::string& path, const std::string& key) {
  const auto it = p.meta.find(key);
  if (it == p.meta.end()) fail(path, 1, "header lacks " + key + "=");
  return it->second;
}

void check_label(const std::string& label) {
  if (label.empty() || label.find_first_of(" \t\n,=") != std::string::npos) {
    throw std::invalid_argument("label '" + label + "' must be non-empty without spaces, commas or '='");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void save_clip(const MotionClip& clip, const std::string& path) {
  check_label(clip.label);
  if (!(clip.dt > 0.0) || clip.frames.size() < 2) throw std::invalid_argument("save_clip: invalid clip");
  auto out = open_out(path);
  using io::format_double;
  out << "# " << kClipMagic << " v1 dt=" << format_double(clip.dt) << " label=" << clip.label
      << " nominal_speed=" << format_double(clip.nominal_speed) << " cycle_period=" << format_double(clip.cycle_period)
      << " frames=" << clip.frames.size() << "\n";
  out << join(kClipColumns) << "\n";
  for (const auto& f : clip.frames) {
    for (int j = 0; j < 4; ++j) out << format_double(f.dof_pos[j]) << ",";
    out << format_double(f.base_height) << "," << format_double(f.base_lin_vel.x()) << ","
        << format_double(f.base_lin_vel.y()) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MotionClip load_clip(const std::string& path, const sim::RobotMorphology& morph) {
  const Parsed p = parse(path, kClipMagic, kClipColumns);
  MotionClip clip;
  clip.dt = meta_double(p, path, "dt");
  clip.label = meta_string(p, path, "label");
  clip.nominal_speed = meta_double(p, path, "nominal_speed");
  clip.cycle_period = p.meta.count("cycle_period") ? meta_double(p, path, "cycle_period") : 0.0;
  clip.frames.resize(p.rows.size());
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto& r = p.rows[i];
    auto& f = clip.frames[i];
    f.dof_pos << r[0], r[1], r[2], r[3];
    f.base_height = r[4];
    f.base_lin_vel = {r[5], r[6]};
    for (int j = 0; j < 4; ++j) {
      if (!(f.dof_pos[j] >= morph.joint_lower[j] && f.dof_pos[j] <= morph.joint_upper[j])) {
        throw std::invalid_argument(path + ":" + std::to_string(i + 3) + ": joint " + sim::kJointNames[j] + " = " +
                                    io::format_double(f.dof_pos[j]) + " outside limits [" +
                                    io::format_double(morph.joint_lower[j]) + ", " +
                                    io::format_double(morph.joint_upper[j]) + "]");
      }
    }
  }
  clip.validate(morph);
  return clip;
}

void save_keypoints(const KeypointTrack& track, const std::string& path) {
  check_label(track.label);
  track.validate();
  auto out = open_out(path);
  using io::format_double;
  out << "# " << kKeypointMagic << " v1 dt=" << format_double(track.dt) << " label=" << track.label
      << " nominal_speed=" << format_double(track.nominal_speed)
      << " cycle_period=" << format_double(track.cycle_period)
      << " thigh_length=" << format_double(track.source_thigh_length)
      << " shank_length=" << format_double(track.source_shank_length) << " frames=" << track.frames.size() << "\n";
  out << join(kKeypointColumns) << "\n";
  for (const auto& f : track.frames) {
    out << format_double(f.hip.x()) << "," << format_double(f.hip.y());
    for (int leg = 0; leg < 2; ++leg) {
      out << "," << format_double(f.knee[leg].x()) << "," << format_double(f.knee[leg].y()) << ","
          << format_double(f.ankle[leg].x()) << "," << format_double(f.ankle[leg].y());
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

KeypointTrack load_keypoints(const std::string& path) {
  const Parsed p = parse(path, kKeypointMagic, kKeypointColumns);
  KeypointTrack t;
  t.dt = meta_double(p, path, "dt");
  t.label = meta_string(p, path, "label");
  t.nominal_speed = meta_double(p, path, "nominal_speed");
  t.cycle_period = meta_double(p, path, "cycle_period");
  t.source_thigh_length = meta_double(p, path, "thigh_length");
  t.source_shank_length = meta_double(p, path, "shank_length");
  t.frames.resize(p.rows.size());
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto& r = p.rows[i];
    auto& f = t.frames[i];
    f.hip = {r[0], r[1]};
    f.knee[0] = {r[2], r[3]};
    f.ankle[0] = {r[4], r[5]};
    f.knee[1] = {r[6], r[7]};
    f.ankle[1] = {r[8], r[9]};
  }
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
  return t;
}

}  // namespace amphim::motion
