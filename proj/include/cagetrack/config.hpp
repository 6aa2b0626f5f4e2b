#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cagetrack/mousemap.hpp"
#include "cagetrack/simulator.hpp"
#include "cagetrack/tracker.hpp"

namespace cagetrack {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

/// Every recognized key with its default.
const std::vector<ConfigKey>& config_keys();

/// Flat `dotted.key = value` settings. Unknown keys are rejected with ConfigError.
class Config {
 public:
  /// All keys at their defaults.
  Config();

  void set(std::string_view key, std::string_view value);
  /// Parses a config file; `#` starts a comment, blank lines are ignored.
  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text);

  const std::string& raw(std::string_view key) const;
  double get_double(std::string_view key) const;
  long long get_int(std::string_view key) const;
  bool get_bool(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

TrackerConfig tracker_config(const Config& c);
MouseMapConfig mousemap_config(const Config& c);
SceneConfig scene_config(const Config& c);
double eval_iou_threshold(const Config& c);
double stream_fps(const Config& c);

}  // namespace cagetrack
