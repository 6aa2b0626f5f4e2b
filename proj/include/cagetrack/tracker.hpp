#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cagetrack/assoc.hpp"
#include "cagetrack/core_types.hpp"
#include "cagetrack/geometry.hpp"
#include "cagetrack/kalman.hpp"

namespace cagetrack {

struct TrackerConfig {
  int n_init = 3;
  int max_age = 30;
  double lambda = 0.9;
  double ema_alpha = 0.9;
  double match_threshold = 0.7;
  double appearance_gate = 0.4;
  std::size_t embedding_dim = 128;
  KalmanConfig kalman;
  OverlapKernel overlap = kDefaultOverlap;
};

enum class TrackStatus { Tentative, Confirmed, Lost, Deleted };

struct Track {
  TrackId id = 0;
  KalmanState kalman;
  TrackStatus status = TrackStatus::Tentative;
  int hits = 0;               // consecutive matched frames
  int time_since_update = 0;  // frames since the last match
  bool ever_confirmed = false;
  std::vector<Observation> log;
};

/// Online tracking-by-detection loop for one stream. Each frame: predict every
/// live track, build the fused motion/appearance cost matrix, match with the
/// Hungarian kernel, then update, spawn and age tracks.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {});

  const TrackerConfig& config() const noexcept { return cfg_; }

  /// Processes all detections of `frame`. Skipped frames since the previous
  /// call are advanced as empty frames. Throws ContractError when `frame` does
  /// not advance or a detection is invalid or belongs to another frame.
  void step(std::span<const Detection> detections, FrameIndex frame);

  /// Live (non-deleted) tracks in creation order.
  const std::vector<Track>& tracks() const noexcept { return tracks_; }
  const AppearanceBank& appearance() const noexcept { return bank_; }
  std::optional<FrameIndex> last_frame() const noexcept { return last_frame_; }

  /// Tracklets of confirmed tracks deleted since the last drain, in deletion order.
  std::vector<Tracklet> drain_completed();

  /// Ends the stream: returns undrained completed tracklets followed by every
  /// live track that was ever confirmed (in id order). Tentative-only tracks are dropped.
  std::vector<Tracklet> finalize();

 private:
  void advance(std::span<const Detection> detections, FrameIndex frame);
  void retire(Track& t);

  TrackerConfig cfg_;
  KalmanFilter kf_;
  AppearanceBank bank_;
  std::vector<Track> tracks_;
  std::vector<Tracklet> completed_;
  std::optional<FrameIndex> last_frame_;
  TrackId next_id_ = 1;
};

/// Convenience: runs a whole detection list (sorted by frame) through a fresh tracker.
std::vector<Tracklet> track_all(std::span<const Detection> detections, const TrackerConfig& cfg);

}  // namespace cagetrack
