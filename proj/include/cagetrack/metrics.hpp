#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cagetrack/core_types.hpp"
#include "cagetrack/mousemap.hpp"

namespace cagetrack {

struct GtBox {
  std::int64_t gt_id = 0;
  BBox box;
  EarTagClass identity = EarTagClass::BrownCheckered;
};

struct GroundTruth {
  std::map<FrameIndex, std::vector<GtBox>> frames;

  std::size_t box_count() const noexcept;
  /// Number of frames in [first, last]; 0 when empty.
  FrameIndex frame_span() const noexcept;
};

/// Hypothesis ids are arbitrary integers; identity is the assigned label, if any.
struct HypBox {
  std::int64_t hyp_id = 0;
  BBox box;
  std::optional<EarTagClass> identity;
};

struct Hypotheses {
  std::map<FrameIndex, std::vector<HypBox>> frames;

  std::size_t box_count() const noexcept;
};

/// Assigned tracklets share one hypothesis per identity (id = -(index + 1));
/// unassigned tracklets keep their own id. With `use_identities` false every
/// tracklet is its own hypothesis.
Hypotheses hypotheses_from(std::span<const IdentifiedTracklet> tracklets, bool use_identities = true);

struct FramePair {
  std::size_t gt = 0;   // index into the frame's gt list
  std::size_t hyp = 0;  // index into the frame's hypothesis list
  friend bool operator==(const FramePair&, const FramePair&) = default;
};

/// CLEAR correspondence for one frame. Pairs with IoU >= threshold are
/// eligible. Each gt first keeps its most recent hypothesis when that
/// hypothesis is present and still eligible; the rest are matched by
/// Hungarian assignment on 1 - IoU. `last_match` maps gt id -> hyp id.
std::vector<FramePair> match_frame(std::span<const GtBox> gt, std::span<const HypBox> hyp, double iou_threshold,
                                   const std::map<std::int64_t, std::int64_t>& last_match = {});

struct EvalReport {
  double mota = 0.0;
  double idf1 = 0.0;
  std::size_t id_switches = 0;
  double switches_per_minute = 0.0;
  double id_accuracy = 0.0;
  double minutes = 0.0;

  std::size_t gt_count = 0;
  std::size_t hyp_count = 0;
  std::size_t matches = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t idtp = 0;
  std::size_t idfp = 0;
  std::size_t idfn = 0;
  std::size_t identity_correct = 0;
};

/// CLEAR-MOT and identity metrics. Throws ContractError (FrameRangeMismatch)
/// when a hypothesis frame lies outside the ground-truth frame range.
EvalReport evaluate(const GroundTruth& gt, const Hypotheses& hyps, double minutes, double iou_threshold = 0.5);

}  // namespace cagetrack
