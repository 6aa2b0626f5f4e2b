#include "cagetrack/pipeline.hpp"

#include <sstream>

#include "cagetrack/io.hpp"

namespace cagetrack {

std::size_t track_stream(std::istream& detections, std::ostream& tracklets, const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  io::DetectionReader reader(detections, cfg.embedding_dim);
  std::size_t written = 0;
  auto flush = [&](const std::vector<Tracklet>& done) {
    for (const auto& t : done) tracklets << io::format_tracklet(t, std::nullopt) << '\n';
    written += done.size();
  };
  while (auto batch = reader.next_frame()) {
    tracker.step(*batch, batch->front().frame);
    flush(tracker.drain_completed());
  }
  flush(tracker.finalize());
  return written;
}

IdentifyResult identify_stream(std::istream& tracklets, std::ostream& out, const MouseMapConfig& cfg) {
  const auto input = io::read_tracklets(tracklets);
  std::vector<Tracklet> plain;
  plain.reserve(input.size());
  for (const auto& it : input) plain.push_back(it.tracklet);
  IdentifyResult result = identify(plain, cfg);
  io::write_tracklets(out, result.tracklets);
  return result;
}

EvalReport eval_streams(std::istream& gt_in, std::istream& hyp_in, double fps, double iou_threshold) {
  const GroundTruth gt = io::read_ground_truth(gt_in);
  const auto tracklets = io::read_tracklets(hyp_in);
  const double minutes = static_cast<double>(gt.frame_span()) / (fps * 60.0);
  return evaluate(gt, hypotheses_from(tracklets), minutes, iou_threshold);
}

void simulate_streams(const SceneConfig& cfg, std::ostream& detections, std::ostream& gt) {
  const Scene scene = generate(cfg);
  std::ostringstream hs;
  hs << "# seed=" << cfg.seed << " fps=" << cfg.fps << " frames=" << cfg.frame_count() << " mice=" << cfg.n_mice;
  const std::string header = hs.str();
  detections << header << '\n';
  io::write_detections(detections, scene.detections);
  gt << header << '\n';
  io::write_ground_truth(gt, scene.truth);
}

}  // namespace cagetrack
