#include "cagetrack/tracker.hpp"

#include <algorithm>
#include <string>

#include "cagetrack/errors.hpp"

namespace cagetrack {

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg), kf_(cfg.kalman), bank_(cfg.ema_alpha) {
  if (cfg_.n_init < 1) throw ConfigError("tracker.n_init", "must be >= 1");
  if (cfg_.max_age < 0) throw ConfigError("tracker.max_age", "must be >= 0");
  if (!(cfg_.lambda >= 0.0 && cfg_.lambda <= 1.0)) throw ConfigError("assoc.lambda", "must lie in [0, 1]");
  if (cfg_.embedding_dim == 0) throw ConfigError("stream.embedding_dim", "must be positive");
}

void Tracker::step(std::span<const Detection> detections, FrameIndex frame) {
  if (last_frame_ && frame <= *last_frame_) {
    throw ContractError("NonMonotonicFrame: frame " + std::to_string(frame) + " does not advance past " +
                        std::to_string(*last_frame_));
  }
  for (const auto& d : detections) {
    if (d.frame != frame) throw ContractError("detection frame differs from step frame");
    if (auto err = validate_detection(d, cfg_.embedding_dim)) {
      throw ContractError("invalid detection at frame " + std::to_string(frame) + ": " +
                          std::string(to_string(*err)));
    }
  }
  if (last_frame_) {
    for (FrameIndex f = *last_frame_ + 1; f < frame; ++f) advance({}, f);
  }
  advance(detections, frame);
  last_frame_ = frame;
}

void Tracker::advance(std::span<const Detection> detections, FrameIndex frame) {
  std::vector<BBox> predicted(tracks_.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    Track& t = tracks_[i];
    t.kalman = kf_.predict(t.kalman);
    try {
      predicted[i] = project(t.kalman);
    } catch (const NumericError&) {
      t.status = TrackStatus::Deleted;
    }
  }

  std::vector<Embedding> det_features;
  det_features.reserve(detections.size());
  for (const auto& d : detections) det_features.push_back(normalize(d.embedding));

  const std::size_t rows = tracks_.size();
  const std::size_t cols = detections.size();
  CostMatrix motion(rows, cols), appearance(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Track& t = tracks_[r];
    for (std::size_t c = 0; c < cols; ++c) {
      if (t.status == TrackStatus::Deleted) {
        motion.gate(r, c);
        appearance.gate(r, c);
        continue;
      }
      const double overlap = cfg_.overlap(predicted[r], detections[c].box);
      const double app = cosine_cost(bank_.at(t.id), det_features[c]);
      motion(r, c) = 1.0 - overlap;
      appearance(r, c) = app;
      if (overlap == 0.0 && app > cfg_.appearance_gate) motion.gate(r, c);
    }
  }

  const CostMatrix fused = fuse_costs(motion, appearance, cfg_.lambda);
  const AssignmentResult assignment = hungarian(fused, cfg_.match_threshold);

  for (const auto& m : assignment.matches) {
    Track& t = tracks_[m.row];
    const Detection& d = detections[m.col];
    t.kalman = kf_.update(t.kalman, d.box, d.confidence);
    bank_.update(t.id, det_features[m.col]);
    t.log.push_back({frame, d.box, d.tag_scores, d.confidence});
    ++t.hits;
    t.time_since_update = 0;
    if (t.status == TrackStatus::Tentative && t.hits >= cfg_.n_init) t.status = TrackStatus::Confirmed;
    if (t.status == TrackStatus::Lost) t.status = TrackStatus::Confirmed;
    if (t.status == TrackStatus::Confirmed) t.ever_confirmed = true;
  }

  for (std::size_t r : assignment.unmatched_rows) {
    Track& t = tracks_[r];
    if (t.status == TrackStatus::Deleted) continue;
    ++t.time_since_update;
    t.hits = 0;
    if (t.status == TrackStatus::Tentative) {
      t.status = TrackStatus::Deleted;
    } else if (t.time_since_update > cfg_.max_age) {
      t.status = TrackStatus::Deleted;
    } else {
      t.status = TrackStatus::Lost;
    }
  }

  for (auto& t : tracks_) {
    if (t.status == TrackStatus::Deleted) retire(t);
  }
  std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::Deleted; });

  for (std::size_t c : assignment.unmatched_cols) {
    const Detection& d = detections[c];
    Track t;
    t.id = next_id_++;
    t.kalman = kf_.init(d.box);
    t.hits = 1;
    t.status = t.hits >= cfg_.n_init ? TrackStatus::Confirmed : TrackStatus::Tentative;
    t.ever_confirmed = t.status == TrackStatus::Confirmed;
    t.log.push_back({frame, d.box, d.tag_scores, d.confidence});
    bank_.update(t.id, det_features[c]);
    tracks_.push_back(std::move(t));
  }
}

void Tracker::retire(Track& t) {
  bank_.erase(t.id);
  if (t.ever_confirmed && !t.log.empty()) {
    completed_.push_back(Tracklet::from_observations(t.id, std::move(t.log)));
  }
}

std::vector<Tracklet> Tracker::drain_completed() {
  std::vector<Tracklet> out;
  out.swap(completed_);
  return out;
}

std::vector<Tracklet> Tracker::finalize() {
  std::vector<Tracklet> out = drain_completed();
  for (auto& t : tracks_) {
    if (t.ever_confirmed && !t.log.empty()) out.push_back(Tracklet::from_observations(t.id, t.log));
  }
  return out;
}

std::vector<Tracklet> track_all(std::span<const Detection> detections, const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  std::size_t i = 0;
  while (i < detections.size()) {
    std::size_t j = i;
    const FrameIndex f = detections[i].frame;
    while (j < detections.size() && detections[j].frame == f) ++j;
    tracker.step(detections.subspan(i, j - i), f);
    i = j;
  }
  return tracker.finalize();
}

}  // namespace cagetrack
