#include <random>

#include <gtest/gtest.h>

#include "cagetrack/errors.hpp"
#include "cagetrack/metrics.hpp"
#include "oracles/oracles.hpp"
#include "support/random_scenes.hpp"

using namespace cagetrack;

namespace {

BBox lane(int k, FrameIndex f) { return {10.0 + 2.0 * static_cast<double>(f), 100.0 * k, 40, 20}; }

/// Two targets on separate lanes for `frames` frames; hypothesis ids follow `hyp_id(k, f)`.
template <class F>
std::pair<GroundTruth, Hypotheses> two_lanes(FrameIndex frames, F hyp_id) {
  GroundTruth gt;
  Hypotheses hyp;
  for (FrameIndex f = 0; f < frames; ++f) {
    for (int k = 0; k < 2; ++k) {
      gt.frames[f].push_back({k + 1, lane(k, f), static_cast<EarTagClass>(k)});
      hyp.frames[f].push_back({hyp_id(k, f), lane(k, f), static_cast<EarTagClass>(k)});
    }
  }
  return {gt, hyp};
}

void expect_tallies_consistent(const EvalReport& r) {
  EXPECT_EQ(r.matches + r.false_negatives, r.gt_count);
  EXPECT_EQ(r.matches + r.false_positives, r.hyp_count);
  EXPECT_EQ(r.idtp + r.idfn, r.gt_count);
  EXPECT_EQ(r.idtp + r.idfp, r.hyp_count);
  EXPECT_LE(r.mota, 1.0);
  EXPECT_GE(r.idf1, 0.0);
  EXPECT_LE(r.idf1, 1.0);
}

}  // namespace

TEST(MatchFrame, IdenticalBoxesAllMatch) {
  const std::vector<GtBox> gt{{1, {0, 0, 10, 10}}, {2, {50, 0, 10, 10}}};
  const std::vector<HypBox> hyp{{7, {50, 0, 10, 10}}, {8, {0, 0, 10, 10}}};
  EXPECT_EQ(match_frame(gt, hyp, 0.5), (std::vector<FramePair>{{0, 1}, {1, 0}}));
}

TEST(MatchFrame, ShiftBelowThresholdIsUnmatched) {
  const std::vector<GtBox> gt{{1, {0, 0, 10, 10}}};
  const std::vector<HypBox> hyp{{7, {6, 0, 10, 10}}};  // IoU 4/16
  EXPECT_TRUE(match_frame(gt, hyp, 0.5).empty());
}

TEST(MatchFrame, CrossedPairsMaximizeTotalIou) {
  // Greedy on the best single pair (g0,h0: 0.9) would strand g1; the optimum crosses.
  const std::vector<GtBox> gt{{1, {0, 0, 10, 10}}, {2, {1.5, 0, 10, 10}}};
  const std::vector<HypBox> hyp{{7, {0.5, 0, 10, 10}}, {8, {-2.5, 0, 10, 10}}};
  const double a = oracle::box_iou(gt[0].box, hyp[0].box) + oracle::box_iou(gt[1].box, hyp[1].box);
  const double b = oracle::box_iou(gt[0].box, hyp[1].box) + oracle::box_iou(gt[1].box, hyp[0].box);
  ASSERT_GT(b, a);
  EXPECT_EQ(match_frame(gt, hyp, 0.5), (std::vector<FramePair>{{0, 1}, {1, 0}}));
}

TEST(MatchFrame, PreviousCorrespondenceWins) {
  const std::vector<GtBox> gt{{1, {0, 0, 10, 10}}};
  const std::vector<HypBox> hyp{{7, {0, 0, 10, 10}}, {8, {2, 0, 10, 10}}};
  EXPECT_EQ(match_frame(gt, hyp, 0.5, {{1, 8}}), (std::vector<FramePair>{{0, 1}}));
  EXPECT_EQ(match_frame(gt, hyp, 0.5), (std::vector<FramePair>{{0, 0}}));
}

TEST(Evaluate, PerfectHypotheses) {
  const auto [gt, hyp] = two_lanes(100, [](int k, FrameIndex) { return k + 10; });
  const auto r = evaluate(gt, hyp, 100.0 / 1800.0);
  EXPECT_EQ(r.mota, 1.0);
  EXPECT_EQ(r.idf1, 1.0);
  EXPECT_EQ(r.id_switches, 0u);
  EXPECT_EQ(r.id_accuracy, 1.0);
  expect_tallies_consistent(r);
}

TEST(Evaluate, SingleLabelSwap) {
  const auto [gt, hyp] = two_lanes(100, [](int k, FrameIndex f) { return f < 50 ? k + 10 : 11 - k; });
  const auto r = evaluate(gt, hyp, 1.0);
  EXPECT_EQ(r.id_switches, 2u);
  EXPECT_DOUBLE_EQ(r.mota, 0.99);
  EXPECT_DOUBLE_EQ(r.switches_per_minute, 2.0);
  EXPECT_DOUBLE_EQ(r.idf1, 0.5);
  expect_tallies_consistent(r);
}

TEST(Evaluate, WrongIdentityLowersAccuracyOnly) {
  auto [gt, hyp] = two_lanes(10, [](int k, FrameIndex) { return k + 10; });
  for (auto& [f, boxes] : hyp.frames) boxes[1].identity = EarTagClass::BlackAllFilled;
  const auto r = evaluate(gt, hyp, 1.0);
  EXPECT_EQ(r.mota, 1.0);
  EXPECT_DOUBLE_EQ(r.id_accuracy, 0.5);
  EXPECT_EQ(r.identity_correct, 10u);
}

TEST(Evaluate, HypothesisOutsideGroundTruthRangeThrows) {
  auto [gt, hyp] = two_lanes(10, [](int k, FrameIndex) { return k + 10; });
  hyp.frames[10].push_back({10, lane(0, 10), std::nullopt});
  EXPECT_THROW(evaluate(gt, hyp, 1.0), ContractError);
}

TEST(Evaluate, EmptyInputs) {
  const auto r = evaluate(GroundTruth{}, Hypotheses{}, 1.0);
  EXPECT_EQ(r.gt_count, 0u);
  EXPECT_EQ(r.mota, 1.0);
  EXPECT_EQ(r.idf1, 1.0);
}

TEST(Hypotheses, AssignedTrackletsShareTheirIdentityTrack) {
  auto obs = [](FrameIndex a, FrameIndex b, int k) {
    std::vector<Observation> o;
    for (FrameIndex f = a; f <= b; ++f) o.push_back({f, lane(k, f), {}, 0.9});
    return o;
  };
  const std::vector<IdentifiedTracklet> ts{
      {Tracklet::from_observations(1, obs(0, 49, 0)), Identity{EarTagClass::BrownCheckered}},
      {Tracklet::from_observations(2, obs(50, 99, 0)), Identity{EarTagClass::BrownCheckered}},
      {Tracklet::from_observations(3, obs(0, 99, 1)), Identity{EarTagClass::RedBarred}},
      {Tracklet::from_observations(4, obs(0, 9, 2)), std::nullopt},
  };
  const Hypotheses h = hypotheses_from(ts);
  EXPECT_EQ(h.frames.at(60)[0].hyp_id, -1);
  EXPECT_EQ(h.frames.at(60)[1].hyp_id, -2);
  EXPECT_EQ(h.frames.at(5)[2].hyp_id, 4);
  EXPECT_FALSE(h.frames.at(5)[2].identity.has_value());

  const auto [gt, unused] = two_lanes(100, [](int k, FrameIndex) { return k; });
  // Fragmented but correctly labelled: no switch with identities, one without.
  std::vector<IdentifiedTracklet> labelled(ts.begin(), ts.begin() + 3);
  const auto with_ids = evaluate(gt, hypotheses_from(labelled), 1.0);
  const auto raw = evaluate(gt, hypotheses_from(labelled, false), 1.0);
  EXPECT_EQ(with_ids.id_switches, 0u);
  EXPECT_EQ(raw.id_switches, 1u);
  EXPECT_EQ(with_ids.id_accuracy, 1.0);
  EXPECT_EQ(raw.id_accuracy, 1.0);
}

TEST(MetricsOracle, RandomScenesAgree) {
  std::mt19937_64 rng(404);
  std::size_t switches = 0;
  for (int k = 0; k < 60; ++k) {
    const auto sc = testsupport::random_eval_scene(rng, 4, 200);
    const auto got = evaluate(sc.gt, sc.hyp, 1.0, 0.5);
    const auto want = oracle::naive_metrics(sc.gt_frames, sc.hyp_frames, 0.5);
    EXPECT_EQ(got.id_switches, want.idsw) << "scene " << k;
    EXPECT_EQ(got.false_positives, want.fp) << "scene " << k;
    EXPECT_EQ(got.false_negatives, want.fn) << "scene " << k;
    EXPECT_EQ(got.idtp, want.idtp) << "scene " << k;
    EXPECT_NEAR(got.mota, want.mota, 1e-9);
    EXPECT_NEAR(got.idf1, want.idf1, 1e-9);
    expect_tallies_consistent(got);
    switches += got.id_switches;
  }
  EXPECT_GT(switches, 0u);  // the generator must exercise switches
}

TEST(MetricsProperty, RelabelingHypothesesChangesNothing) {
  std::mt19937_64 rng(405);
  for (int k = 0; k < 40; ++k) {
    auto sc = testsupport::random_eval_scene(rng, 4, 150);
    const auto before = evaluate(sc.gt, sc.hyp, 1.0);
    for (auto& [f, boxes] : sc.hyp.frames)
      for (auto& b : boxes) b.hyp_id = 5000 - 7 * b.hyp_id;
    const auto after = evaluate(sc.gt, sc.hyp, 1.0);
    EXPECT_EQ(before.mota, after.mota);
    EXPECT_EQ(before.idf1, after.idf1);
    EXPECT_EQ(before.id_switches, after.id_switches);
  }
}
