#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cagetrack {

using FrameIndex = std::int64_t;
using TrackId = std::int64_t;

/// Axis-aligned box in pixels, top-left corner plus extent.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const noexcept { return x + 0.5 * w; }
  double cy() const noexcept { return y + 0.5 * h; }
  double area() const noexcept { return w * h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

bool is_valid(const BBox& b) noexcept;

/// Ear-tag classifier output classes. The first three identify an animal;
/// NoRead and NoEarTag carry no identity evidence.
enum class EarTagClass : std::uint8_t {
  BrownCheckered = 0,
  RedBarred = 1,
  BlackAllFilled = 2,
  NoRead = 3,
  NoEarTag = 4,
};

inline constexpr std::size_t kNumTagClasses = 5;
inline constexpr std::size_t kNumIdentityClasses = 3;

using TagScores = std::array<double, kNumTagClasses>;

constexpr bool is_identity_bearing(EarTagClass c) noexcept {
  return static_cast<std::size_t>(c) < kNumIdentityClasses;
}

/// Wire name, e.g. "red_barred".
std::string_view to_string(EarTagClass c) noexcept;
std::optional<EarTagClass> tag_class_from_string(std::string_view name) noexcept;

/// An identity is one identity-bearing ear-tag class.
struct Identity {
  EarTagClass label = EarTagClass::BrownCheckered;

  std::size_t index() const noexcept { return static_cast<std::size_t>(label); }
  friend bool operator==(const Identity&, const Identity&) = default;
};

/// The first `n` identity-bearing classes. Throws ConfigError when n is not in [1, 3].
std::vector<Identity> default_identities(std::size_t n);

struct Detection {
  FrameIndex frame = 0;
  BBox box;
  double confidence = 0.0;
  std::vector<double> embedding;
  TagScores tag_scores{};
};

enum class DetectionError {
  NonFiniteField,
  NegativeDimension,
  ScoreSumMismatch,
  EmbeddingDimMismatch,
  ConfidenceOutOfRange,
};

std::string_view to_string(DetectionError e) noexcept;

inline constexpr double kTagSumTolerance = 1e-6;

/// Returns std::nullopt when every Detection invariant holds, otherwise the first violation.
std::optional<DetectionError> validate_detection(const Detection& d, std::size_t embedding_dim);

struct Observation {
  FrameIndex frame = 0;
  BBox box;
  TagScores tag_scores{};
  double confidence = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Temporally ordered run of observations attributed to one hypothesis.
struct Tracklet {
  TrackId id = 0;
  FrameIndex start_frame = 0;
  FrameIndex end_frame = 0;
  std::vector<Observation> observations;
  TagScores class_conf_sums{};

  /// Builds a tracklet from observations, deriving the frame span and class sums.
  /// Observations must be non-empty with strictly increasing frames.
  static Tracklet from_observations(TrackId id, std::vector<Observation> obs);

  std::size_t length() const noexcept { return observations.size(); }
  double mean_confidence() const noexcept;
  bool overlaps(const Tracklet& other) const noexcept {
    return start_frame <= other.end_frame && other.start_frame <= end_frame;
  }
};

TagScores sum_tag_scores(const std::vector<Observation>& obs) noexcept;

/// Checks ordering, span and class-sum invariants.
bool tracklet_invariants_hold(const Tracklet& t, double per_obs_tol = 1e-9) noexcept;

}  // namespace cagetrack
