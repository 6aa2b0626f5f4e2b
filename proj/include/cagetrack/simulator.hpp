#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cagetrack/core_types.hpp"
#include "cagetrack/metrics.hpp"

namespace cagetrack {

using ConfusionMatrix = std::array<TagScores, kNumTagClasses>;

/// d on the diagonal, (1 - d)/4 everywhere else.
ConfusionMatrix confusion_from_diagonal(double d);

struct SceneConfig {
  std::size_t n_mice = 3;
  double fps = 30.0;
  double duration_s = 60.0;
  double cage_width = 640.0;
  double cage_height = 480.0;
  double mouse_width = 80.0;
  double mouse_height = 48.0;

  // Locomotion: heading random walk with mean-reverting speed (pixels per frame).
  double speed_mean = 2.0;
  double speed_std = 0.75;
  double turn_std = 0.15;

  // Detector degradation.
  double miss_rate = 0.05;
  double box_jitter_std = 2.0;
  double conf_mean = 0.9;
  double conf_std = 0.05;
  bool occlusion = true;
  double occlusion_iou = 0.3;  // pairs overlapping beyond this emit one merged box

  // Ear-tag classifier surrogate.
  ConfusionMatrix confusion = confusion_from_diagonal(0.85);
  double no_read_rate = 0.33;

  // Appearance surrogate: 0 = clonal animals, 1 = unrelated anchors.
  std::size_t embedding_dim = 128;
  double embedding_separation = 0.5;
  double embedding_noise = 0.05;

  std::uint64_t seed = 0;

  /// Perfect detector and classifier: no misses, jitter, merges or confusion.
  static SceneConfig ideal();

  std::size_t frame_count() const noexcept;
};

/// Throws ConfigError (InvalidConfig) naming the offending key.
void validate(const SceneConfig& cfg);

struct Scene {
  GroundTruth truth;
  std::vector<Detection> detections;  // sorted by frame
};

/// Ground-truth label of mouse k: the k-th identity-bearing class, NoEarTag beyond those.
EarTagClass mouse_identity(std::size_t k) noexcept;

/// Deterministic in cfg (including seed).
Scene generate(const SceneConfig& cfg);

}  // namespace cagetrack
