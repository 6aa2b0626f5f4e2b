#pragma once

#include <istream>
#include <ostream>

#include "cagetrack/metrics.hpp"
#include "cagetrack/mousemap.hpp"
#include "cagetrack/simulator.hpp"
#include "cagetrack/tracker.hpp"

namespace cagetrack {

/// Streams detections through a tracker, writing each tracklet as soon as its
/// track ends (identity null). Returns the number of tracklets written.
std::size_t track_stream(std::istream& detections, std::ostream& tracklets, const TrackerConfig& cfg);

/// Reads tracklets, assigns identities, writes them back sorted by id.
IdentifyResult identify_stream(std::istream& tracklets, std::ostream& out, const MouseMapConfig& cfg);

/// Evaluation over a gt stream and a tracklet stream; minutes come from the gt frame span.
EvalReport eval_streams(std::istream& gt, std::istream& hyp, double fps, double iou_threshold);

/// Writes both scene files, each starting with a `# seed=...` comment line.
void simulate_streams(const SceneConfig& cfg, std::ostream& detections, std::ostream& gt);

}  // namespace cagetrack
