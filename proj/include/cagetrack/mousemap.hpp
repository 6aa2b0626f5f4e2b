#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cagetrack/core_types.hpp"

namespace cagetrack {

struct FrameInterval {
  FrameIndex start = 0;
  FrameIndex end = 0;  // inclusive

  bool overlaps(const FrameInterval& o) const noexcept { return start <= o.end && o.start <= end; }
};

/// Tracklets competing for a finite set of identities. score(t, i) is the
/// tracklet's summed classifier confidence for identity i's ear-tag class.
struct AssignmentProblem {
  std::vector<Tracklet> tracklets;
  std::vector<Identity> identities;

  /// Optional per-identity intervals that are already booked (one list per identity).
  std::vector<std::vector<FrameInterval>> reserved;
  /// Optional additive preference per (tracklet, identity); steers the search
  /// but is not part of the reported objective.
  std::vector<std::vector<double>> bonus;

  double score(std::size_t t, std::size_t i) const noexcept {
    return tracklets[t].class_conf_sums[identities[i].index()];
  }
};

struct IdentityAssignment {
  /// Index into problem.identities per tracklet (aligned with problem.tracklets); nullopt = Unassigned.
  std::vector<std::optional<std::size_t>> choice;
  double objective = 0.0;

  std::size_t assigned_count() const noexcept;
};

/// Exact maximizer of the summed (score + bonus) over assignments where every
/// tracklet receives at most one identity and the tracklets sharing an
/// identity have pairwise disjoint frame intervals. Among optimal assignments
/// the one with the most assigned tracklets wins, then the lexicographically
/// smallest identity vector in tracklet-id order (Unassigned sorts last).
///
/// Solved per connected component of the interval-overlap graph. A sweep in
/// start-frame order keeps, per identity, the tracklet still occupying it, so
/// the optimum costs O(T * (c+1)^N) for peak concurrency c. The tie-broken
/// optimum is found by branching in tracklet-id order with that sweep as an
/// exact bound. Objective comparisons tolerate 1e-9 relative rounding.
IdentityAssignment solve(const AssignmentProblem& p);

/// Checks per-identity disjointness (including reserved intervals).
bool assignment_is_feasible(const AssignmentProblem& p, const IdentityAssignment& a) noexcept;

/// Sum of score(t, choice(t)) over assigned tracklets, in tracklet-id order.
double assignment_objective(const AssignmentProblem& p, const IdentityAssignment& a) noexcept;

struct MouseMapConfig {
  std::size_t n_identities = 3;
  FrameIndex gap_max = 90;       // frames
  double dist_max_ratio = 0.5;   // of the mean diagonal of the two boundary boxes
  double window_minutes = 1.0;   // <= 0 solves the whole recording at once
  double fps = 30.0;
  double continuity_bonus = 0.5; // per-identity preference carried across windows
};

/// Merges b onto the end of a when a ends before b starts, the frame gap
/// (b.start - a.end) is at most gap_max, and the boundary boxes' centers are
/// within dist_max_ratio * mean diagonal. Returns nullopt (Incompatible) otherwise.
std::optional<Tracklet> stitch(const Tracklet& a, const Tracklet& b, const MouseMapConfig& cfg);

/// Largest number of tracklets whose frame spans cover a common frame.
std::size_t max_concurrency(std::span<const Tracklet> tracklets);

/// True when more than n tracklets are simultaneously active at some frame.
bool needs_presolve(std::span<const Tracklet> tracklets, std::size_t n);

struct PresolveResult {
  std::vector<Tracklet> kept;     // stitched and reduced, sorted by id
  std::vector<Tracklet> dropped;  // removed by the concurrency reduction, sorted by id
};

/// Stitches compatible fragments, then, wherever more than n tracklets remain
/// concurrent, keeps only the n with the highest mean detection confidence
/// inside that conflict window.
PresolveResult presolve_detailed(std::span<const Tracklet> tracklets, std::size_t n, const MouseMapConfig& cfg);

std::vector<Tracklet> presolve(std::span<const Tracklet> tracklets, std::size_t n, const MouseMapConfig& cfg);

struct IdentifiedTracklet {
  Tracklet tracklet;
  std::optional<Identity> identity;
};

struct IdentifyResult {
  std::vector<IdentifiedTracklet> tracklets;  // sorted by tracklet id
  double objective = 0.0;
  bool presolved = false;
};

/// Full identity stage: presolve when the concurrency exceeds the identity
/// count, then solve per window (or once, in batch mode). Windows are formed
/// by tracklet start frame; identities booked by earlier windows stay booked,
/// and stitch-compatible continuations of an earlier tracklet get a small
/// preference for its identity.
IdentifyResult identify(std::span<const Tracklet> tracklets, const MouseMapConfig& cfg);

}  // namespace cagetrack
