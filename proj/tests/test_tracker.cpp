#include <map>
#include <set>

#include <gtest/gtest.h>

#include "cagetrack/errors.hpp"
#include "cagetrack/simulator.hpp"
#include "cagetrack/tracker.hpp"

using namespace cagetrack;

namespace {

constexpr std::size_t kDim = 4;

Detection det(FrameIndex f, BBox b, std::size_t anchor = 0, TagScores tags = {0, 0, 0, 1, 0}) {
  Detection d;
  d.frame = f;
  d.box = b;
  d.confidence = 0.9;
  d.embedding.assign(kDim, 0.0);
  d.embedding[anchor % kDim] = 1.0;
  d.tag_scores = tags;
  return d;
}

TrackerConfig small_config() {
  TrackerConfig c;
  c.embedding_dim = kDim;
  return c;
}

}  // namespace

TEST(Tracker, ColdStartSpawnsTentativeTracks) {
  Tracker t(small_config());
  const std::vector<Detection> d{det(0, {0, 0, 10, 10}), det(0, {100, 0, 10, 10}, 1), det(0, {0, 100, 10, 10}, 2)};
  t.step(d, 0);
  ASSERT_EQ(t.tracks().size(), 3u);
  for (const auto& tr : t.tracks()) EXPECT_EQ(tr.status, TrackStatus::Tentative);
  EXPECT_EQ(t.tracks()[0].id, 1);
  EXPECT_EQ(t.tracks()[2].id, 3);
}

TEST(Tracker, PerfectContinuationConfirmsAndResetsAge) {
  const TrackerConfig cfg = small_config();
  Tracker t(cfg);
  const BBox b{50, 50, 40, 20};
  for (FrameIndex f = 0; f < cfg.n_init; ++f) t.step(std::vector<Detection>{det(f, b)}, f);
  ASSERT_EQ(t.tracks().size(), 1u);
  EXPECT_EQ(t.tracks()[0].status, TrackStatus::Confirmed);
  t.step(std::vector<Detection>{}, cfg.n_init);
  EXPECT_EQ(t.tracks()[0].status, TrackStatus::Lost);
  EXPECT_EQ(t.tracks()[0].time_since_update, 1);
  t.step(std::vector<Detection>{det(cfg.n_init + 1, b)}, cfg.n_init + 1);
  EXPECT_EQ(t.tracks()[0].status, TrackStatus::Confirmed);
  EXPECT_EQ(t.tracks()[0].time_since_update, 0);
  EXPECT_EQ(t.tracks()[0].id, 1);
}

TEST(Tracker, TentativeMissIsDeletedWithoutTracklet) {
  Tracker t(small_config());
  t.step(std::vector<Detection>{det(0, {0, 0, 10, 10})}, 0);
  t.step(std::vector<Detection>{}, 1);
  EXPECT_TRUE(t.tracks().empty());
  EXPECT_TRUE(t.finalize().empty());
}

TEST(Tracker, LostBeyondMaxAgeIsRetired) {
  TrackerConfig cfg = small_config();
  cfg.max_age = 5;
  Tracker t(cfg);
  const BBox b{0, 0, 10, 10};
  for (FrameIndex f = 0; f < 4; ++f) t.step(std::vector<Detection>{det(f, b)}, f);
  t.step(std::vector<Detection>{}, 3 + cfg.max_age);  // max_age frames unmatched, still alive
  EXPECT_EQ(t.tracks().size(), 1u);
  t.step(std::vector<Detection>{}, 4 + cfg.max_age);
  EXPECT_TRUE(t.tracks().empty());
  const auto done = t.drain_completed();
  ASSERT_EQ(done.size(), 1u);
  EXPECT_EQ(done[0].start_frame, 0);
  EXPECT_EQ(done[0].end_frame, 3);
  EXPECT_TRUE(t.drain_completed().empty());
}

TEST(Tracker, FinalizeSpansMatchedFramesAndSumsTags) {
  Tracker t(small_config());
  const BBox b{10, 10, 30, 30};
  const TagScores tags{0.7, 0.1, 0.1, 0.1, 0.0};
  for (FrameIndex f = 0; f < 6; ++f) t.step(std::vector<Detection>{det(f, b, 0, tags)}, f);
  t.step(std::vector<Detection>{}, 6);
  t.step(std::vector<Detection>{}, 7);
  const auto out = t.finalize();
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].start_frame, 0);
  EXPECT_EQ(out[0].end_frame, 5);
  EXPECT_EQ(out[0].length(), 6u);
  EXPECT_NEAR(out[0].class_conf_sums[0], 6 * 0.7, 1e-12);
  EXPECT_TRUE(tracklet_invariants_hold(out[0]));
}

TEST(Tracker, NonMonotonicFrameThrows) {
  Tracker t(small_config());
  t.step(std::vector<Detection>{}, 5);
  EXPECT_THROW(t.step(std::vector<Detection>{}, 5), ContractError);
  EXPECT_THROW(t.step(std::vector<Detection>{}, 2), ContractError);
}

TEST(Tracker, RejectsForeignOrInvalidDetections) {
  Tracker t(small_config());
  EXPECT_THROW(t.step(std::vector<Detection>{det(3, {0, 0, 1, 1})}, 4), ContractError);
  EXPECT_THROW(t.step(std::vector<Detection>{det(5, {0, 0, 0, 1})}, 5), ContractError);
}

TEST(Tracker, ThreeConstantVelocityTargets) {
  std::vector<Detection> dets;
  for (FrameIndex f = 0; f < 300; ++f) {
    const double s = static_cast<double>(f);
    dets.push_back(det(f, {10 + s, 20, 40, 24}, 0));
    dets.push_back(det(f, {500 - s, 200, 40, 24}, 1));
    dets.push_back(det(f, {200, 400 - 0.5 * s, 40, 24}, 2));
  }
  const auto out = track_all(dets, small_config());
  ASSERT_EQ(out.size(), 3u);
  for (const auto& tr : out) {
    EXPECT_EQ(tr.start_frame, 0);
    EXPECT_EQ(tr.end_frame, 299);
    EXPECT_EQ(tr.length(), 300u);
  }
}

TEST(TrackerProperty, PerfectDetectionsGiveOneTrackletPerTarget) {
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      SceneConfig sc = SceneConfig::ideal();
      sc.n_mice = n;
      sc.duration_s = 20;
      sc.seed = seed;
      const Scene scene = generate(sc);
      TrackerConfig tc;
      tc.embedding_dim = sc.embedding_dim;
      const auto out = track_all(scene.detections, tc);
      ASSERT_EQ(out.size(), n) << "mice " << n << " seed " << seed;
      for (const auto& tr : out) EXPECT_EQ(tr.length(), sc.frame_count());
    }
  }
}

TEST(TrackerProperty, OneToOneAndDeterministic) {
  SceneConfig sc;  // degraded scene with merges and misses
  sc.duration_s = 30;
  sc.seed = 4;
  const Scene scene = generate(sc);
  TrackerConfig tc;
  tc.embedding_dim = sc.embedding_dim;
  const auto a = track_all(scene.detections, tc);
  const auto b = track_all(scene.detections, tc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].id, b[k].id);
    EXPECT_EQ(a[k].observations, b[k].observations);
  }

  std::map<FrameIndex, std::vector<BBox>> used;
  for (const auto& tr : a) {
    ASSERT_TRUE(tracklet_invariants_hold(tr));
    for (const auto& o : tr.observations) {
      for (const auto& other : used[o.frame]) EXPECT_FALSE(other == o.box) << "frame " << o.frame;
      used[o.frame].push_back(o.box);
    }
  }
}

TEST(Tracker, StreamedAndBatchAgree) {
  SceneConfig sc;
  sc.duration_s = 20;
  sc.seed = 9;
  const Scene scene = generate(sc);
  TrackerConfig tc;
  tc.embedding_dim = sc.embedding_dim;
  Tracker t(tc);
  std::vector<Tracklet> streamed;
  std::size_t i = 0;
  while (i < scene.detections.size()) {
    const FrameIndex f = scene.detections[i].frame;
    std::size_t j = i;
    while (j < scene.detections.size() && scene.detections[j].frame == f) ++j;
    t.step(std::span(scene.detections).subspan(i, j - i), f);
    for (auto& x : t.drain_completed()) streamed.push_back(std::move(x));
    i = j;
  }
  for (auto& x : t.finalize()) streamed.push_back(std::move(x));
  const auto batch = track_all(scene.detections, tc);
  ASSERT_EQ(streamed.size(), batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) EXPECT_EQ(streamed[k].observations, batch[k].observations);
}
