#include "cagetrack/metrics.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "cagetrack/assoc.hpp"
#include "cagetrack/errors.hpp"
#include "cagetrack/geometry.hpp"

namespace cagetrack {

std::size_t GroundTruth::box_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [f, boxes] : frames) n += boxes.size();
  return n;
}

FrameIndex GroundTruth::frame_span() const noexcept {
  if (frames.empty()) return 0;
  return frames.rbegin()->first - frames.begin()->first + 1;
}

std::size_t Hypotheses::box_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [f, boxes] : frames) n += boxes.size();
  return n;
}

Hypotheses hypotheses_from(std::span<const IdentifiedTracklet> tracklets, bool use_identities) {
  Hypotheses h;
  for (const auto& it : tracklets) {
    std::int64_t hyp_id = it.tracklet.id;
    if (use_identities && it.identity) hyp_id = -static_cast<std::int64_t>(it.identity->index()) - 1;
    std::optional<EarTagClass> label;
    if (it.identity) label = it.identity->label;
    for (const auto& o : it.tracklet.observations) h.frames[o.frame].push_back({hyp_id, o.box, label});
  }
  return h;
}

std::vector<FramePair> match_frame(std::span<const GtBox> gt, std::span<const HypBox> hyp, double iou_threshold,
                                   const std::map<std::int64_t, std::int64_t>& last_match) {
  std::vector<FramePair> pairs;
  std::vector<char> gt_used(gt.size(), 0), hyp_used(hyp.size(), 0);

  for (std::size_t g = 0; g < gt.size(); ++g) {
    auto it = last_match.find(gt[g].gt_id);
    if (it == last_match.end()) continue;
    for (std::size_t h = 0; h < hyp.size(); ++h) {
      if (hyp_used[h] || hyp[h].hyp_id != it->second) continue;
      if (iou(gt[g].box, hyp[h].box) >= iou_threshold) {
        pairs.push_back({g, h});
        gt_used[g] = hyp_used[h] = 1;
      }
      break;
    }
  }

  std::vector<std::size_t> rows, cols;
  for (std::size_t g = 0; g < gt.size(); ++g)
    if (!gt_used[g]) rows.push_back(g);
  for (std::size_t h = 0; h < hyp.size(); ++h)
    if (!hyp_used[h]) cols.push_back(h);
  CostMatrix cost(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = iou(gt[rows[r]].box, hyp[cols[c]].box);
      if (v >= iou_threshold) {
        cost(r, c) = 1.0 - v;
      } else {
        cost.gate(r, c);
      }
    }
  }
  for (const auto& m : hungarian(cost).matches) pairs.push_back({rows[m.row], cols[m.col]});
  std::sort(pairs.begin(), pairs.end(), [](const FramePair& a, const FramePair& b) { return a.gt < b.gt; });
  return pairs;
}

EvalReport evaluate(const GroundTruth& gt, const Hypotheses& hyps, double minutes, double iou_threshold) {
  if (!hyps.frames.empty()) {
    const bool outside = gt.frames.empty() || hyps.frames.begin()->first < gt.frames.begin()->first ||
                         hyps.frames.rbegin()->first > gt.frames.rbegin()->first;
    if (outside) throw ContractError("FrameRangeMismatch: hypotheses cover frames outside the ground truth range");
  }

  EvalReport rep;
  rep.minutes = minutes;
  rep.gt_count = gt.box_count();
  rep.hyp_count = hyps.box_count();

  std::set<FrameIndex> frames;
  for (const auto& [f, _] : gt.frames) frames.insert(f);
  for (const auto& [f, _] : hyps.frames) frames.insert(f);

  // Trajectory-level overlap counts for the identity matching.
  std::map<std::int64_t, std::size_t> gt_index, hyp_index;
  for (const auto& [f, boxes] : gt.frames)
    for (const auto& b : boxes) gt_index.emplace(b.gt_id, gt_index.size());
  for (const auto& [f, boxes] : hyps.frames)
    for (const auto& b : boxes) hyp_index.emplace(b.hyp_id, hyp_index.size());
  std::vector<std::vector<std::size_t>> overlap(gt_index.size(), std::vector<std::size_t>(hyp_index.size(), 0));

  const std::vector<GtBox> no_gt;
  const std::vector<HypBox> no_hyp;
  std::map<std::int64_t, std::int64_t> last_match;
  for (FrameIndex f : frames) {
    auto git = gt.frames.find(f);
    auto hit = hyps.frames.find(f);
    const auto& g = git == gt.frames.end() ? no_gt : git->second;
    const auto& h = hit == hyps.frames.end() ? no_hyp : hit->second;

    const auto pairs = match_frame(g, h, iou_threshold, last_match);
    rep.matches += pairs.size();
    rep.false_negatives += g.size() - pairs.size();
    rep.false_positives += h.size() - pairs.size();
    for (const auto& p : pairs) {
      const std::int64_t gid = g[p.gt].gt_id;
      const std::int64_t hid = h[p.hyp].hyp_id;
      auto prev = last_match.find(gid);
      if (prev != last_match.end() && prev->second != hid) ++rep.id_switches;
      last_match[gid] = hid;
      if (h[p.hyp].identity && *h[p.hyp].identity == g[p.gt].identity) ++rep.identity_correct;
    }

    for (const auto& gb : g)
      for (const auto& hb : h)
        if (iou(gb.box, hb.box) >= iou_threshold) ++overlap[gt_index.at(gb.gt_id)][hyp_index.at(hb.hyp_id)];
  }

  if (!overlap.empty() && !hyp_index.empty()) {
    CostMatrix cost(gt_index.size(), hyp_index.size());
    for (std::size_t r = 0; r < cost.rows(); ++r)
      for (std::size_t c = 0; c < cost.cols(); ++c) cost(r, c) = -static_cast<double>(overlap[r][c]);
    for (const auto& m : hungarian(cost).matches) rep.idtp += overlap[m.row][m.col];
  }
  rep.idfn = rep.gt_count - rep.idtp;
  rep.idfp = rep.hyp_count - rep.idtp;

  const double gt_n = static_cast<double>(rep.gt_count);
  rep.mota = 1.0 - static_cast<double>(rep.false_negatives + rep.false_positives + rep.id_switches) / std::max(gt_n, 1.0);
  const double id_den = static_cast<double>(2 * rep.idtp + rep.idfp + rep.idfn);
  rep.idf1 = id_den == 0.0 ? 1.0 : 2.0 * static_cast<double>(rep.idtp) / id_den;
  rep.switches_per_minute = minutes > 0.0 ? static_cast<double>(rep.id_switches) / minutes : 0.0;
  if (rep.matches > 0) {
    rep.id_accuracy = static_cast<double>(rep.identity_correct) / static_cast<double>(rep.matches);
  } else {
    rep.id_accuracy = rep.gt_count == 0 && rep.hyp_count == 0 ? 1.0 : 0.0;
  }
  return rep;
}

}  // namespace cagetrack
