#include "cagetrack/mousemap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "cagetrack/errors.hpp"
#include "cagetrack/geometry.hpp"

namespace cagetrack {

std::size_t IdentityAssignment::assigned_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(choice.begin(), choice.end(), [](const auto& c) { return c.has_value(); }));
}

namespace {

FrameInterval span_of(const Tracklet& t) noexcept { return {t.start_frame, t.end_frame}; }

std::vector<std::size_t> id_order(const std::vector<Tracklet>& ts) {
  std::vector<std::size_t> order(ts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ts[a].id < ts[b].id; });
  return order;
}

// Exact search over one connected component of the overlap graph.
//
// Tracklets are swept by start frame; the sweep state records which tracklet
// currently occupies each identity (only occupants still active at the next
// start matter), so equivalent partial assignments merge. That makes the
// optimum computable in O(T * (c+1)^N) for concurrency c. The tie-broken
// optimum is then recovered by branching in tracklet-id order, fixing each
// tracklet to the first option whose best completion still attains the
// optimum.
class ComponentSearch {
 public:
  ComponentSearch(const AssignmentProblem& p, const std::vector<std::vector<double>>& weights,
                  std::vector<std::size_t> items)
      : p_(p), w_(weights), items_(std::move(items)), n_ids_(p.identities.size()) {
    // `items_` arrives in tracklet-id order; that is the canonical order.
    const std::size_t k = items_.size();
    reserved_ok_.assign(k, std::vector<char>(n_ids_, 1));
    for (std::size_t a = 0; a < k; ++a) {
      const FrameInterval iv = span_of(p_.tracklets[items_[a]]);
      for (std::size_t i = 0; i < n_ids_ && i < p_.reserved.size(); ++i) {
        for (const auto& r : p_.reserved[i]) {
          if (r.overlaps(iv)) {
            reserved_ok_[a][i] = 0;
            break;
          }
        }
      }
    }
    sweep_.resize(k);
    std::iota(sweep_.begin(), sweep_.end(), std::size_t{0});
    std::stable_sort(sweep_.begin(), sweep_.end(),
                     [&](std::size_t x, std::size_t y) { return tracklet(x).start_frame < tracklet(y).start_frame; });
  }

  std::vector<std::optional<std::size_t>> run() {
    const std::size_t k = items_.size();
    std::vector<int> fixed(k, kFree);
    const Value target = *optimum(fixed);

    for (std::size_t a = 0; a < k; ++a) {
      bool placed = false;
      for (std::size_t i = 0; i < n_ids_ && !placed; ++i) {
        if (!reserved_ok_[a][i]) continue;
        fixed[a] = static_cast<int>(i);
        const auto v = optimum(fixed);
        placed = v && attains(*v, target);
      }
      if (!placed) fixed[a] = kUnassigned;
    }

    std::vector<std::optional<std::size_t>> out(k);
    for (std::size_t a = 0; a < k; ++a)
      if (fixed[a] >= 0) out[a] = static_cast<std::size_t>(fixed[a]);
    return out;
  }

 private:
  static constexpr int kFree = -2;
  static constexpr int kUnassigned = -1;
  static constexpr int kVacant = -1;

  struct Value {
    double value = 0.0;
    std::size_t count = 0;
  };

  using State = std::vector<int>;  // occupant per identity (index into items_), or kVacant

  struct StateHash {
    std::size_t operator()(const State& s) const noexcept {
      std::size_t h = 1469598103934665603ull;
      for (int x : s) h = (h ^ static_cast<std::size_t>(x + 1)) * 1099511628211ull;
      return h;
    }
  };

  const Tracklet& tracklet(std::size_t a) const noexcept { return p_.tracklets[items_[a]]; }
  double w(std::size_t a, std::size_t i) const noexcept { return w_[items_[a]][i]; }

  static double tolerance(double v) noexcept { return 1e-9 * std::max(1.0, std::abs(v)); }

  static bool better(const Value& x, const Value& y) noexcept {
    const double tol = tolerance(y.value);
    if (x.value > y.value + tol) return true;
    if (x.value < y.value - tol) return false;
    return x.count > y.count;
  }

  static bool attains(const Value& v, const Value& target) noexcept {
    return v.value >= target.value - tolerance(target.value) && v.count >= target.count;
  }

  // Best (value, count) over completions consistent with `fixed`
  // (kFree = undecided); nullopt when the fixed choices are infeasible.
  std::optional<Value> optimum(const std::vector<int>& fixed) const {
    std::unordered_map<State, Value, StateHash> cur, next;
    cur.emplace(State(n_ids_, kVacant), Value{});
    for (std::size_t a : sweep_) {
      const FrameIndex start = tracklet(a).start_frame;
      next.clear();
      auto offer = [&next](State s, Value v) {
        auto [it, inserted] = next.try_emplace(std::move(s), v);
        if (!inserted && better(v, it->second)) it->second = v;
      };
      for (const auto& [state, value] : cur) {
        State s = state;
        for (int& occ : s)
          if (occ != kVacant && tracklet(static_cast<std::size_t>(occ)).end_frame < start) occ = kVacant;
        const int f = fixed[a];
        if (f == kFree || f == kUnassigned) offer(s, value);
        for (std::size_t i = 0; i < n_ids_; ++i) {
          if (f >= 0 && static_cast<std::size_t>(f) != i) continue;
          if (f == kUnassigned || !reserved_ok_[a][i] || s[i] != kVacant) continue;
          State t = s;
          t[i] = static_cast<int>(a);
          offer(std::move(t), Value{value.value + w(a, i), value.count + 1});
        }
      }
      std::swap(cur, next);
      if (cur.empty()) return std::nullopt;
    }
    std::optional<Value> best;
    for (const auto& [state, value] : cur)
      if (!best || better(value, *best)) best = value;
    return best;
  }

  const AssignmentProblem& p_;
  const std::vector<std::vector<double>>& w_;
  std::vector<std::size_t> items_;
  std::size_t n_ids_;
  std::vector<std::vector<char>> reserved_ok_;
  std::vector<std::size_t> sweep_;
};

}  // namespace

IdentityAssignment solve(const AssignmentProblem& p) {
  const std::size_t t_count = p.tracklets.size();
  const std::size_t n_ids = p.identities.size();
  IdentityAssignment out;
  out.choice.assign(t_count, std::nullopt);
  if (t_count == 0 || n_ids == 0) return out;

  for (const auto& t : p.tracklets) {
    if (t.start_frame > t.end_frame) throw ContractError("tracklet " + std::to_string(t.id) + " has an inverted interval");
  }

  std::vector<std::vector<double>> weights(t_count, std::vector<double>(n_ids, 0.0));
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t i = 0; i < n_ids; ++i) {
      double b = 0.0;
      if (t < p.bonus.size() && i < p.bonus[t].size()) b = p.bonus[t][i];
      weights[t][i] = p.score(t, i) + b;
    }
  }

  // Connected components of the interval-overlap graph are independent subproblems.
  std::vector<std::size_t> by_start(t_count);
  std::iota(by_start.begin(), by_start.end(), std::size_t{0});
  std::stable_sort(by_start.begin(), by_start.end(), [&](std::size_t a, std::size_t b) {
    return p.tracklets[a].start_frame < p.tracklets[b].start_frame;
  });
  std::vector<std::vector<std::size_t>> components;
  FrameIndex reach = 0;
  for (std::size_t idx : by_start) {
    const Tracklet& t = p.tracklets[idx];
    if (components.empty() || t.start_frame > reach) {
      components.emplace_back();
      reach = t.end_frame;
    }
    components.back().push_back(idx);
    reach = std::max(reach, t.end_frame);
  }

  for (auto& comp : components) {
    std::stable_sort(comp.begin(), comp.end(), [&](std::size_t a, std::size_t b) { return p.tracklets[a].id < p.tracklets[b].id; });
    ComponentSearch search(p, weights, comp);
    const auto local = search.run();
    for (std::size_t a = 0; a < comp.size(); ++a) out.choice[comp[a]] = local[a];
  }
  out.objective = assignment_objective(p, out);
  return out;
}

bool assignment_is_feasible(const AssignmentProblem& p, const IdentityAssignment& a) noexcept {
  if (a.choice.size() != p.tracklets.size()) return false;
  const std::size_t n_ids = p.identities.size();
  for (std::size_t t = 0; t < a.choice.size(); ++t) {
    if (!a.choice[t]) continue;
    const std::size_t i = *a.choice[t];
    if (i >= n_ids) return false;
    const FrameInterval iv = span_of(p.tracklets[t]);
    if (i < p.reserved.size()) {
      for (const auto& r : p.reserved[i])
        if (r.overlaps(iv)) return false;
    }
    for (std::size_t u = t + 1; u < a.choice.size(); ++u) {
      if (a.choice[u] == a.choice[t] && p.tracklets[t].overlaps(p.tracklets[u])) return false;
    }
  }
  return true;
}

double assignment_objective(const AssignmentProblem& p, const IdentityAssignment& a) noexcept {
  double v = 0.0;
  for (std::size_t t : id_order(p.tracklets)) {
    if (t < a.choice.size() && a.choice[t]) v += p.score(t, *a.choice[t]);
  }
  return v;
}

namespace {

bool stitch_compatible(const Tracklet& a, const Tracklet& b, const MouseMapConfig& cfg) {
  if (a.observations.empty() || b.observations.empty()) return false;
  if (a.end_frame >= b.start_frame) return false;
  if (b.start_frame - a.end_frame > cfg.gap_max) return false;
  const BBox& tail = a.observations.back().box;
  const BBox& head = b.observations.front().box;
  const double dist_max = cfg.dist_max_ratio * 0.5 * (diagonal(tail) + diagonal(head));
  return center_distance(tail, head) <= dist_max;
}

}  // namespace

std::optional<Tracklet> stitch(const Tracklet& a, const Tracklet& b, const MouseMapConfig& cfg) {
  if (!stitch_compatible(a, b, cfg)) return std::nullopt;
  Tracklet merged;
  merged.id = a.id;
  merged.start_frame = a.start_frame;
  merged.end_frame = b.end_frame;
  merged.observations.reserve(a.observations.size() + b.observations.size());
  merged.observations = a.observations;
  merged.observations.insert(merged.observations.end(), b.observations.begin(), b.observations.end());
  for (std::size_t k = 0; k < kNumTagClasses; ++k) merged.class_conf_sums[k] = a.class_conf_sums[k] + b.class_conf_sums[k];
  return merged;
}

namespace {

struct ConflictWindow {
  FrameIndex start = 0;
  FrameIndex end = 0;
};

// First maximal frame range where more than n spans are active.
std::optional<ConflictWindow> first_conflict(std::span<const Tracklet> ts, std::size_t n) {
  std::vector<std::pair<FrameIndex, int>> events;
  events.reserve(2 * ts.size());
  for (const auto& t : ts) {
    events.emplace_back(t.start_frame, +1);
    events.emplace_back(t.end_frame + 1, -1);
  }
  std::sort(events.begin(), events.end());
  long active = 0;
  std::optional<FrameIndex> open;
  for (std::size_t e = 0; e < events.size();) {
    const FrameIndex f = events[e].first;
    while (e < events.size() && events[e].first == f) active += events[e++].second;
    if (active > static_cast<long>(n)) {
      if (!open) open = f;
    } else if (open) {
      return ConflictWindow{*open, f - 1};
    }
  }
  return std::nullopt;
}

double window_confidence(const Tracklet& t, const ConflictWindow& w) {
  double s = 0.0;
  std::size_t k = 0;
  for (const auto& o : t.observations) {
    if (o.frame < w.start || o.frame > w.end) continue;
    s += o.confidence;
    ++k;
  }
  return k == 0 ? 0.0 : s / static_cast<double>(k);
}

std::vector<Tracklet> stitch_all(std::span<const Tracklet> input, const MouseMapConfig& cfg) {
  std::vector<Tracklet> ts(input.begin(), input.end());
  std::stable_sort(ts.begin(), ts.end(), [](const Tracklet& a, const Tracklet& b) {
    return a.start_frame != b.start_frame ? a.start_frame < b.start_frame : a.id < b.id;
  });
  // Chains grow by appending the compatible fragment; each chain tail accepts one successor.
  std::vector<Tracklet> chains;
  for (auto& t : ts) {
    std::optional<std::size_t> pick;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      if (!stitch_compatible(chains[c], t, cfg)) continue;
      if (!pick) {
        pick = c;
        continue;
      }
      const Tracklet& cur = chains[*pick];
      const FrameIndex gap_c = t.start_frame - chains[c].end_frame;
      const FrameIndex gap_p = t.start_frame - cur.end_frame;
      const double d_c = center_distance(chains[c].observations.back().box, t.observations.front().box);
      const double d_p = center_distance(cur.observations.back().box, t.observations.front().box);
      if (gap_c < gap_p || (gap_c == gap_p && (d_c < d_p || (d_c == d_p && chains[c].id < cur.id)))) pick = c;
    }
    if (pick) {
      chains[*pick] = *stitch(chains[*pick], t, cfg);
    } else {
      chains.push_back(std::move(t));
    }
  }
  return chains;
}

void sort_by_id(std::vector<Tracklet>& ts) {
  std::stable_sort(ts.begin(), ts.end(), [](const Tracklet& a, const Tracklet& b) { return a.id < b.id; });
}

}  // namespace

std::size_t max_concurrency(std::span<const Tracklet> tracklets) {
  std::vector<std::pair<FrameIndex, int>> events;
  for (const auto& t : tracklets) {
    events.emplace_back(t.start_frame, +1);
    events.emplace_back(t.end_frame + 1, -1);
  }
  std::sort(events.begin(), events.end());
  long active = 0, peak = 0;
  for (std::size_t e = 0; e < events.size();) {
    const FrameIndex f = events[e].first;
    while (e < events.size() && events[e].first == f) active += events[e++].second;
    peak = std::max(peak, active);
  }
  return static_cast<std::size_t>(peak);
}

bool needs_presolve(std::span<const Tracklet> tracklets, std::size_t n) { return max_concurrency(tracklets) > n; }

PresolveResult presolve_detailed(std::span<const Tracklet> tracklets, std::size_t n, const MouseMapConfig& cfg) {
  PresolveResult out;
  out.kept = stitch_all(tracklets, cfg);
  while (auto window = first_conflict(out.kept, n)) {
    std::optional<std::size_t> worst;
    double worst_conf = 0.0;
    for (std::size_t k = 0; k < out.kept.size(); ++k) {
      const Tracklet& t = out.kept[k];
      if (t.end_frame < window->start || t.start_frame > window->end) continue;
      const double c = window_confidence(t, *window);
      if (!worst) {
        worst = k;
        worst_conf = c;
        continue;
      }
      const Tracklet& w = out.kept[*worst];
      if (c < worst_conf || (c == worst_conf && (t.length() < w.length() || (t.length() == w.length() && t.id > w.id)))) {
        worst = k;
        worst_conf = c;
      }
    }
    out.dropped.push_back(std::move(out.kept[*worst]));
    out.kept.erase(out.kept.begin() + static_cast<std::ptrdiff_t>(*worst));
  }
  sort_by_id(out.kept);
  sort_by_id(out.dropped);
  return out;
}

std::vector<Tracklet> presolve(std::span<const Tracklet> tracklets, std::size_t n, const MouseMapConfig& cfg) {
  return presolve_detailed(tracklets, n, cfg).kept;
}

IdentifyResult identify(std::span<const Tracklet> tracklets, const MouseMapConfig& cfg) {
  const std::vector<Identity> identities = default_identities(cfg.n_identities);
  IdentifyResult result;

  std::vector<Tracklet> working(tracklets.begin(), tracklets.end());
  sort_by_id(working);
  std::vector<Tracklet> dropped;
  if (needs_presolve(working, identities.size())) {
    auto pre = presolve_detailed(working, identities.size(), cfg);
    working = std::move(pre.kept);
    dropped = std::move(pre.dropped);
    result.presolved = true;
  }

  std::vector<std::optional<std::size_t>> choice(working.size());
  if (cfg.window_minutes <= 0.0) {
    AssignmentProblem p{working, identities, {}, {}};
    choice = solve(p).choice;
  } else {
    const auto window_len = std::max<FrameIndex>(1, static_cast<FrameIndex>(std::llround(cfg.window_minutes * 60.0 * cfg.fps)));
    std::map<FrameIndex, std::vector<std::size_t>> windows;
    for (std::size_t k = 0; k < working.size(); ++k) windows[working[k].start_frame / window_len].push_back(k);

    std::vector<std::size_t> done;  // indices already assigned an identity
    for (const auto& [w, members] : windows) {
      AssignmentProblem p;
      p.identities = identities;
      p.reserved.assign(identities.size(), {});
      for (std::size_t k : done) p.reserved[*choice[k]].push_back(span_of(working[k]));
      p.bonus.assign(members.size(), std::vector<double>(identities.size(), 0.0));
      for (std::size_t m = 0; m < members.size(); ++m) {
        const Tracklet& t = working[members[m]];
        p.tracklets.push_back(t);
        for (std::size_t k : done) {
          if (stitch_compatible(working[k], t, cfg)) p.bonus[m][*choice[k]] = cfg.continuity_bonus;
        }
      }
      const IdentityAssignment a = solve(p);
      for (std::size_t m = 0; m < members.size(); ++m) {
        choice[members[m]] = a.choice[m];
        if (a.choice[m]) done.push_back(members[m]);
      }
    }
  }

  for (std::size_t k = 0; k < working.size(); ++k) {
    std::optional<Identity> id;
    if (choice[k]) id = identities[*choice[k]];
    result.tracklets.push_back({std::move(working[k]), id});
  }
  for (auto& t : dropped) result.tracklets.push_back({std::move(t), std::nullopt});
  std::stable_sort(result.tracklets.begin(), result.tracklets.end(),
                   [](const IdentifiedTracklet& a, const IdentifiedTracklet& b) { return a.tracklet.id < b.tracklet.id; });
  for (const auto& it : result.tracklets) {
    if (it.identity) result.objective += it.tracklet.class_conf_sums[it.identity->index()];
  }
  return result;
}

}  // namespace cagetrack
