#include "cagetrack/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cagetrack/errors.hpp"

namespace cagetrack {

namespace {

constexpr std::array<std::string_view, kNumTagClasses> kTagNames = {
    "brown_checkered", "red_barred", "black_all_filled", "no_read", "no_ear_tag"};

}  // namespace

bool is_valid(const BBox& b) noexcept {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) && std::isfinite(b.h) &&
         b.w > 0.0 && b.h > 0.0;
}

std::string_view to_string(EarTagClass c) noexcept { return kTagNames[static_cast<std::size_t>(c)]; }

std::optional<EarTagClass> tag_class_from_string(std::string_view name) noexcept {
  for (std::size_t k = 0; k < kTagNames.size(); ++k) {
    if (kTagNames[k] == name) return static_cast<EarTagClass>(k);
  }
  return std::nullopt;
}

std::vector<Identity> default_identities(std::size_t n) {
  if (n < 1 || n > kNumIdentityClasses) {
    throw ConfigError("mousemap.n_identities", "must be between 1 and 3");
  }
  std::vector<Identity> ids;
  ids.reserve(n);
  for (std::size_t k = 0; k < n; ++k) ids.push_back({static_cast<EarTagClass>(k)});
  return ids;
}

std::string_view to_string(DetectionError e) noexcept {
  switch (e) {
    case DetectionError::NonFiniteField: return "NonFiniteField";
    case DetectionError::NegativeDimension: return "NegativeDimension";
    case DetectionError::ScoreSumMismatch: return "ScoreSumMismatch";
    case DetectionError::EmbeddingDimMismatch: return "EmbeddingDimMismatch";
    case DetectionError::ConfidenceOutOfRange: return "ConfidenceOutOfRange";
  }
  return "Unknown";
}

std::optional<DetectionError> validate_detection(const Detection& d, std::size_t embedding_dim) {
  const BBox& b = d.box;
  if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) || !std::isfinite(b.h) ||
      !std::isfinite(d.confidence)) {
    return DetectionError::NonFiniteField;
  }
  for (double v : d.embedding) {
    if (!std::isfinite(v)) return DetectionError::NonFiniteField;
  }
  for (double v : d.tag_scores) {
    if (!std::isfinite(v)) return DetectionError::NonFiniteField;
  }
  if (d.frame < 0) return DetectionError::NegativeDimension;
  if (b.w <= 0.0 || b.h <= 0.0) return DetectionError::NegativeDimension;
  if (d.confidence < 0.0 || d.confidence > 1.0) return DetectionError::ConfidenceOutOfRange;

  double sum = 0.0;
  for (double v : d.tag_scores) {
    if (v < 0.0) return DetectionError::ScoreSumMismatch;
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTagSumTolerance) return DetectionError::ScoreSumMismatch;
  if (d.embedding.size() != embedding_dim) return DetectionError::EmbeddingDimMismatch;
  return std::nullopt;
}

TagScores sum_tag_scores(const std::vector<Observation>& obs) noexcept {
  TagScores sums{};
  for (const auto& o : obs) {
    for (std::size_t k = 0; k < kNumTagClasses; ++k) sums[k] += o.tag_scores[k];
  }
  return sums;
}

Tracklet Tracklet::from_observations(TrackId id, std::vector<Observation> obs) {
  if (obs.empty()) throw ContractError("tracklet needs at least one observation");
  for (std::size_t i = 1; i < obs.size(); ++i) {
    if (obs[i].frame <= obs[i - 1].frame) {
      throw ContractError("tracklet observation frames must be strictly increasing");
    }
  }
  Tracklet t;
  t.id = id;
  t.start_frame = obs.front().frame;
  t.end_frame = obs.back().frame;
  t.class_conf_sums = sum_tag_scores(obs);
  t.observations = std::move(obs);
  return t;
}

double Tracklet::mean_confidence() const noexcept {
  if (observations.empty()) return 0.0;
  double s = 0.0;
  for (const auto& o : observations) s += o.confidence;
  return s / static_cast<double>(observations.size());
}

bool tracklet_invariants_hold(const Tracklet& t, double per_obs_tol) noexcept {
  if (t.start_frame > t.end_frame) return false;
  for (std::size_t i = 0; i < t.observations.size(); ++i) {
    const auto f = t.observations[i].frame;
    if (f < t.start_frame || f > t.end_frame) return false;
    if (i > 0 && f <= t.observations[i - 1].frame) return false;
  }
  const TagScores expect = sum_tag_scores(t.observations);
  const double tol = per_obs_tol * static_cast<double>(std::max<std::size_t>(1, t.observations.size()));
  for (std::size_t k = 0; k < kNumTagClasses; ++k) {
    if (std::abs(expect[k] - t.class_conf_sums[k]) > tol) return false;
  }
  return true;
}

}  // namespace cagetrack
