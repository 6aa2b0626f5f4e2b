#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cagetrack/core_types.hpp"
#include "cagetrack/metrics.hpp"
#include "cagetrack/mousemap.hpp"

namespace cagetrack::io {

// Every format is JSON lines. Lines starting with '#' are comments and blank
// lines are skipped; line numbers in ParseError count physical lines.

/// {"frame": int, "box": [x,y,w,h], "conf": float, "emb": [float x D], "tags": [float x 5]}
Detection parse_detection(std::string_view line, std::size_t line_no, std::size_t embedding_dim);
std::string format_detection(const Detection& d);

/// {"tracklet_id": int, "identity": string|null, "start": int, "end": int,
///  "obs": [{"frame": int, "box": [...], "tags": [...], "conf": float}]}
IdentifiedTracklet parse_tracklet(std::string_view line, std::size_t line_no);
std::string format_tracklet(const Tracklet& t, const std::optional<Identity>& identity);

/// {"frame": int, "gt_id": int, "identity": string, "box": [x,y,w,h]}
std::string format_gt_box(FrameIndex frame, const GtBox& g);

/// Reads detections one frame at a time. Frames must be non-decreasing.
class DetectionReader {
 public:
  DetectionReader(std::istream& in, std::size_t embedding_dim) : in_(in), dim_(embedding_dim) {}

  /// Next non-empty frame's detections; std::nullopt at end of input.
  std::optional<std::vector<Detection>> next_frame();

 private:
  std::optional<Detection> read_one();

  std::istream& in_;
  std::size_t dim_;
  std::size_t line_no_ = 0;
  std::optional<Detection> pending_;
  std::optional<FrameIndex> last_frame_;
};

std::vector<Detection> read_detections(std::istream& in, std::size_t embedding_dim);
void write_detections(std::ostream& out, std::span<const Detection> dets);

std::vector<IdentifiedTracklet> read_tracklets(std::istream& in);
void write_tracklets(std::ostream& out, std::span<const IdentifiedTracklet> ts);

GroundTruth read_ground_truth(std::istream& in);
void write_ground_truth(std::ostream& out, const GroundTruth& gt);

/// `key = value` lines.
std::string format_report_text(const EvalReport& r);
/// One JSON object with every field.
std::string format_report_json(const EvalReport& r);

}  // namespace cagetrack::io
