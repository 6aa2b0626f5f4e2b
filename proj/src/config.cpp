#include "cagetrack/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cagetrack/errors.hpp"

namespace cagetrack {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"stream.fps", "30", "frames per second of the input stream"},
      {"stream.embedding_dim", "128", "appearance embedding dimension"},
      {"kalman.std_weight_position", "0.05", "position std as a fraction of box height"},
      {"kalman.std_weight_velocity", "0.00625", "velocity std as a fraction of box height"},
      {"kalman.aspect_std", "0.01", "aspect-ratio std (initial and process)"},
      {"kalman.aspect_vel_std", "0.00001", "aspect-ratio velocity std"},
      {"kalman.measurement_aspect_std", "0.1", "aspect-ratio measurement std"},
      {"assoc.lambda", "0.9", "motion weight in the fused cost"},
      {"assoc.ema_alpha", "0.9", "appearance EMA smoothing factor"},
      {"assoc.match_threshold", "0.7", "largest fused cost accepted as a match"},
      {"assoc.appearance_gate", "0.4", "appearance cost gate for non-overlapping pairs"},
      {"tracker.n_init", "3", "consecutive hits needed to confirm a track"},
      {"tracker.max_age", "30", "frames a lost track survives without a match"},
      {"mousemap.n_identities", "3", "identities in the cage"},
      {"mousemap.gap_max", "90", "largest frame gap bridged by stitching"},
      {"mousemap.dist_max_ratio", "0.5", "stitch distance limit as a fraction of the mean box diagonal"},
      {"mousemap.window_minutes", "1", "solve window length; 0 solves the whole recording"},
      {"mousemap.continuity_bonus", "0.5", "preference for continuing an identity across windows"},
      {"eval.iou_threshold", "0.5", "IoU needed for a ground-truth match"},
      {"sim.n_mice", "3", "animals in the scene"},
      {"sim.fps", "30", "frames per second"},
      {"sim.duration_s", "60", "scene length in seconds"},
      {"sim.cage_width", "640", "cage width in pixels"},
      {"sim.cage_height", "480", "cage height in pixels"},
      {"sim.mouse_width", "80", "nominal box width"},
      {"sim.mouse_height", "48", "nominal box height"},
      {"sim.speed_mean", "2", "mean speed, pixels per frame"},
      {"sim.speed_std", "0.75", "speed fluctuation"},
      {"sim.turn_std", "0.15", "heading change per frame, radians"},
      {"sim.miss_rate", "0.05", "probability a detection is dropped"},
      {"sim.box_jitter_std", "2", "box coordinate noise, pixels"},
      {"sim.conf_mean", "0.9", "mean detection confidence"},
      {"sim.conf_std", "0.05", "detection confidence spread"},
      {"sim.occlusion", "true", "merge heavily overlapping animals into one box"},
      {"sim.occlusion_iou", "0.3", "overlap above which boxes merge"},
      {"sim.confusion_diagonal", "0.85", "classifier accuracy when sim.confusion is empty"},
      {"sim.confusion", "", "25 comma-separated row-major confusion entries"},
      {"sim.no_read_rate", "0.33", "fraction of unreadable ear tags"},
      {"sim.embedding_dim", "128", "embedding dimension"},
      {"sim.embedding_separation", "0.5", "0 = clonal appearance, 1 = unrelated"},
      {"sim.embedding_noise", "0.05", "per-dimension embedding noise"},
      {"sim.seed", "0", "random seed"},
  };
  return keys;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Config::Config() {
  for (const auto& k : config_keys()) values_.emplace(std::string(k.name), std::string(k.default_value));
}

void Config::set(std::string_view key, std::string_view value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(std::string(key), "unknown key");
  it->second = std::string(trim(value));
}

void Config::load_text(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "line " + std::to_string(line_no) + " is not of the form key = value");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str());
}

const std::string& Config::raw(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(std::string(key), "unknown key");
  return it->second;
}

double Config::get_double(std::string_view key) const {
  const std::string& s = raw(key);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key), "expected a number, got '" + s + "'");
  }
  return v;
}

long long Config::get_int(std::string_view key) const {
  const std::string& s = raw(key);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError(std::string(key), "expected an integer, got '" + s + "'");
  }
  return v;
}

bool Config::get_bool(std::string_view key) const {
  const std::string& s = raw(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(std::string(key), "expected a boolean, got '" + s + "'");
}

namespace {

long long positive_int(const Config& c, std::string_view key) {
  const long long v = c.get_int(key);
  if (v <= 0) throw ConfigError(std::string(key), "must be positive");
  return v;
}

double unit_interval(const Config& c, std::string_view key) {
  const double v = c.get_double(key);
  if (v < 0.0 || v > 1.0) throw ConfigError(std::string(key), "must lie in [0, 1]");
  return v;
}

}  // namespace

TrackerConfig tracker_config(const Config& c) {
  TrackerConfig t;
  t.n_init = static_cast<int>(positive_int(c, "tracker.n_init"));
  t.max_age = static_cast<int>(c.get_int("tracker.max_age"));
  if (t.max_age < 0) throw ConfigError("tracker.max_age", "must be non-negative");
  t.lambda = unit_interval(c, "assoc.lambda");
  t.ema_alpha = c.get_double("assoc.ema_alpha");
  if (t.ema_alpha < 0.0 || t.ema_alpha >= 1.0) throw ConfigError("assoc.ema_alpha", "must lie in [0, 1)");
  t.match_threshold = c.get_double("assoc.match_threshold");
  t.appearance_gate = c.get_double("assoc.appearance_gate");
  t.embedding_dim = static_cast<std::size_t>(positive_int(c, "stream.embedding_dim"));
  t.kalman.std_weight_position = c.get_double("kalman.std_weight_position");
  t.kalman.std_weight_velocity = c.get_double("kalman.std_weight_velocity");
  t.kalman.aspect_std = c.get_double("kalman.aspect_std");
  t.kalman.aspect_vel_std = c.get_double("kalman.aspect_vel_std");
  t.kalman.measurement_aspect_std = c.get_double("kalman.measurement_aspect_std");
  for (const char* key : {"kalman.std_weight_position", "kalman.std_weight_velocity", "kalman.aspect_std",
                          "kalman.aspect_vel_std", "kalman.measurement_aspect_std"}) {
    if (!(c.get_double(key) > 0.0)) throw ConfigError(key, "must be positive");
  }
  return t;
}

MouseMapConfig mousemap_config(const Config& c) {
  MouseMapConfig m;
  m.n_identities = static_cast<std::size_t>(positive_int(c, "mousemap.n_identities"));
  if (m.n_identities > kNumIdentityClasses) throw ConfigError("mousemap.n_identities", "at most 3 identity-bearing classes");
  m.gap_max = c.get_int("mousemap.gap_max");
  if (m.gap_max < 1) throw ConfigError("mousemap.gap_max", "must be >= 1");
  m.dist_max_ratio = c.get_double("mousemap.dist_max_ratio");
  if (m.dist_max_ratio < 0.0) throw ConfigError("mousemap.dist_max_ratio", "must be non-negative");
  m.window_minutes = c.get_double("mousemap.window_minutes");
  m.continuity_bonus = c.get_double("mousemap.continuity_bonus");
  m.fps = stream_fps(c);
  return m;
}

SceneConfig scene_config(const Config& c) {
  SceneConfig s;
  s.n_mice = static_cast<std::size_t>(positive_int(c, "sim.n_mice"));
  s.fps = c.get_double("sim.fps");
  s.duration_s = c.get_double("sim.duration_s");
  s.cage_width = c.get_double("sim.cage_width");
  s.cage_height = c.get_double("sim.cage_height");
  s.mouse_width = c.get_double("sim.mouse_width");
  s.mouse_height = c.get_double("sim.mouse_height");
  s.speed_mean = c.get_double("sim.speed_mean");
  s.speed_std = c.get_double("sim.speed_std");
  s.turn_std = c.get_double("sim.turn_std");
  s.miss_rate = c.get_double("sim.miss_rate");
  s.box_jitter_std = c.get_double("sim.box_jitter_std");
  s.conf_mean = c.get_double("sim.conf_mean");
  s.conf_std = c.get_double("sim.conf_std");
  s.occlusion = c.get_bool("sim.occlusion");
  s.occlusion_iou = c.get_double("sim.occlusion_iou");
  s.no_read_rate = c.get_double("sim.no_read_rate");
  s.embedding_dim = static_cast<std::size_t>(positive_int(c, "sim.embedding_dim"));
  s.embedding_separation = c.get_double("sim.embedding_separation");
  s.embedding_noise = c.get_double("sim.embedding_noise");
  const long long seed = c.get_int("sim.seed");
  if (seed < 0) throw ConfigError("sim.seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);

  const std::string& explicit_confusion = c.raw("sim.confusion");
  if (explicit_confusion.empty()) {
    s.confusion = confusion_from_diagonal(unit_interval(c, "sim.confusion_diagonal"));
  } else {
    std::vector<double> entries;
    std::string_view rest = explicit_confusion;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view tok = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw ConfigError("sim.confusion", "malformed entry '" + std::string(tok) + "'");
      entries.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (entries.size() != kNumTagClasses * kNumTagClasses) throw ConfigError("sim.confusion", "expected 25 entries");
    for (std::size_t r = 0; r < kNumTagClasses; ++r)
      for (std::size_t k = 0; k < kNumTagClasses; ++k) s.confusion[r][k] = entries[r * kNumTagClasses + k];
  }
  validate(s);
  return s;
}

double eval_iou_threshold(const Config& c) {
  const double v = c.get_double("eval.iou_threshold");
  if (!(v > 0.0 && v <= 1.0)) throw ConfigError("eval.iou_threshold", "must lie in (0, 1]");
  return v;
}

double stream_fps(const Config& c) {
  const double v = c.get_double("stream.fps");
  if (!(v > 0.0)) throw ConfigError("stream.fps", "must be positive");
  return v;
}

}  // namespace cagetrack
