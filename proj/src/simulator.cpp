#include "cagetrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cagetrack/assoc.hpp"
#include "cagetrack/errors.hpp"
#include "cagetrack/geometry.hpp"

namespace cagetrack {

ConfusionMatrix confusion_from_diagonal(double d) {
  ConfusionMatrix m{};
  const double off = (1.0 - d) / static_cast<double>(kNumTagClasses - 1);
  for (std::size_t r = 0; r < kNumTagClasses; ++r)
    for (std::size_t c = 0; c < kNumTagClasses; ++c) m[r][c] = r == c ? d : off;
  return m;
}

SceneConfig SceneConfig::ideal() {
  SceneConfig cfg;
  cfg.miss_rate = 0.0;
  cfg.box_jitter_std = 0.0;
  cfg.conf_mean = 0.95;
  cfg.conf_std = 0.0;
  cfg.occlusion = false;
  cfg.confusion = confusion_from_diagonal(1.0);
  cfg.no_read_rate = 0.0;
  cfg.embedding_noise = 0.0;
  return cfg;
}

std::size_t SceneConfig::frame_count() const noexcept {
  return static_cast<std::size_t>(std::llround(fps * duration_s));
}

EarTagClass mouse_identity(std::size_t k) noexcept {
  return k < kNumIdentityClasses ? static_cast<EarTagClass>(k) : EarTagClass::NoEarTag;
}

void validate(const SceneConfig& cfg) {
  auto bad = [](const char* key, const char* why) { throw ConfigError(key, why); };
  if (cfg.n_mice < 1) bad("sim.n_mice", "must be >= 1");
  if (!(cfg.fps > 0.0)) bad("sim.fps", "must be positive");
  if (!(cfg.duration_s >= 0.0)) bad("sim.duration_s", "must be non-negative");
  if (!(cfg.mouse_width > 0.0)) bad("sim.mouse_width", "must be positive");
  if (!(cfg.mouse_height > 0.0)) bad("sim.mouse_height", "must be positive");
  if (!(cfg.cage_width > 1.2 * cfg.mouse_width)) bad("sim.cage_width", "cage must be wider than a mouse");
  if (!(cfg.cage_height > 1.2 * cfg.mouse_height)) bad("sim.cage_height", "cage must be taller than a mouse");
  if (!(cfg.speed_mean >= 0.0)) bad("sim.speed_mean", "must be non-negative");
  if (!(cfg.speed_std >= 0.0)) bad("sim.speed_std", "must be non-negative");
  if (!(cfg.turn_std >= 0.0)) bad("sim.turn_std", "must be non-negative");
  if (!(cfg.miss_rate >= 0.0 && cfg.miss_rate <= 1.0)) bad("sim.miss_rate", "must lie in [0, 1]");
  if (!(cfg.no_read_rate >= 0.0 && cfg.no_read_rate <= 1.0)) bad("sim.no_read_rate", "must lie in [0, 1]");
  if (!(cfg.box_jitter_std >= 0.0)) bad("sim.box_jitter_std", "must be non-negative");
  if (!(cfg.conf_mean >= 0.0 && cfg.conf_mean <= 1.0)) bad("sim.conf_mean", "must lie in [0, 1]");
  if (!(cfg.conf_std >= 0.0)) bad("sim.conf_std", "must be non-negative");
  if (!(cfg.occlusion_iou > 0.0 && cfg.occlusion_iou <= 1.0)) bad("sim.occlusion_iou", "must lie in (0, 1]");
  if (cfg.embedding_dim == 0) bad("sim.embedding_dim", "must be positive");
  if (!(cfg.embedding_separation >= 0.0 && cfg.embedding_separation <= 1.0))
    bad("sim.embedding_separation", "must lie in [0, 1]");
  if (!(cfg.embedding_noise >= 0.0)) bad("sim.embedding_noise", "must be non-negative");
  for (const auto& row : cfg.confusion) {
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) bad("sim.confusion", "entries must be non-negative");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) bad("sim.confusion", "rows must sum to 1");
  }
}

namespace {

struct Mouse {
  double cx = 0.0, cy = 0.0;
  double w = 0.0, h = 0.0;
  double heading = 0.0;
  double speed = 0.0;

  BBox box() const noexcept { return {cx - 0.5 * w, cy - 0.5 * h, w, h}; }
};

class SceneGenerator {
 public:
  explicit SceneGenerator(const SceneConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  Scene run() {
    make_anchors();
    place_mice();
    Scene scene;
    const std::size_t frames = cfg_.frame_count();
    for (std::size_t f = 0; f < frames; ++f) {
      const auto frame = static_cast<FrameIndex>(f);
      if (f > 0) move_mice();
      auto& truth = scene.truth.frames[frame];
      for (std::size_t k = 0; k < mice_.size(); ++k)
        truth.push_back({static_cast<std::int64_t>(k), mice_[k].box(), mouse_identity(k)});
      emit_detections(frame, scene.detections);
    }
    return scene;
  }

 private:
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double gauss(double sd) { return sd > 0.0 ? std::normal_distribution<double>(0.0, sd)(rng_) : 0.0; }
  bool bernoulli(double p) { return p > 0.0 && uniform(0.0, 1.0) < p; }

  std::vector<double> random_unit() {
    std::vector<double> v(cfg_.embedding_dim);
    for (double& x : v) x = gauss(1.0);
    return normalize(v);
  }

  void make_anchors() {
    const auto shared = random_unit();
    const double s = cfg_.embedding_separation;
    for (std::size_t k = 0; k < cfg_.n_mice; ++k) {
      const auto own = random_unit();
      std::vector<double> a(cfg_.embedding_dim);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = (1.0 - s) * shared[i] + s * own[i];
      anchors_.push_back(normalize(a));
    }
  }

  void place_mice() {
    for (std::size_t k = 0; k < cfg_.n_mice; ++k) {
      Mouse m;
      const double scale = uniform(0.9, 1.1);
      m.w = cfg_.mouse_width * scale;
      m.h = cfg_.mouse_height * scale;
      m.heading = uniform(-std::numbers::pi, std::numbers::pi);
      m.speed = cfg_.speed_mean;
      for (int attempt = 0; attempt < 100; ++attempt) {
        m.cx = uniform(0.5 * m.w, cfg_.cage_width - 0.5 * m.w);
        m.cy = uniform(0.5 * m.h, cfg_.cage_height - 0.5 * m.h);
        const bool clear = std::none_of(mice_.begin(), mice_.end(), [&](const Mouse& o) { return iou(o.box(), m.box()) > 0.0; });
        if (clear) break;
      }
      mice_.push_back(m);
    }
  }

  static void reflect(double& pos, double lo, double hi, bool& flipped) {
    flipped = false;
    for (int guard = 0; guard < 4 && (pos < lo || pos > hi); ++guard) {
      if (pos < lo) pos = 2.0 * lo - pos;
      if (pos > hi) pos = 2.0 * hi - pos;
      flipped = !flipped;
    }
    pos = std::clamp(pos, lo, hi);
  }

  void move_mice() {
    constexpr double kReversion = 0.05;
    for (auto& m : mice_) {
      m.heading += gauss(cfg_.turn_std);
      m.speed += kReversion * (cfg_.speed_mean - m.speed) + gauss(cfg_.speed_std * std::sqrt(2.0 * kReversion));
      m.speed = std::max(0.0, m.speed);
      m.cx += m.speed * std::cos(m.heading);
      m.cy += m.speed * std::sin(m.heading);
      bool fx = false, fy = false;
      reflect(m.cx, 0.5 * m.w, cfg_.cage_width - 0.5 * m.w, fx);
      reflect(m.cy, 0.5 * m.h, cfg_.cage_height - 0.5 * m.h, fy);
      if (fx) m.heading = std::numbers::pi - m.heading;
      if (fy) m.heading = -m.heading;
    }
  }

  std::size_t sample_class(const TagScores& row) {
    double u = uniform(0.0, 1.0);
    for (std::size_t c = 0; c < kNumTagClasses; ++c) {
      if (u < row[c]) return c;
      u -= row[c];
    }
    for (std::size_t c = kNumTagClasses; c-- > 0;)
      if (row[c] > 0.0) return c;
    return 0;
  }

  TagScores tag_scores_for(EarTagClass truth) {
    const bool unreadable = is_identity_bearing(truth) && bernoulli(cfg_.no_read_rate);
    const EarTagClass shown = unreadable ? EarTagClass::NoRead : truth;
    const std::size_t predicted = sample_class(cfg_.confusion[static_cast<std::size_t>(shown)]);

    // Peak mass on the predicted class, the rest spread at random.
    TagScores s{};
    const double peak = uniform(0.55, 1.0);
    double spread = 0.0;
    for (std::size_t c = 0; c < kNumTagClasses; ++c) {
      if (c == predicted) continue;
      s[c] = uniform(0.0, 1.0);
      spread += s[c];
    }
    for (std::size_t c = 0; c < kNumTagClasses; ++c) {
      s[c] = c == predicted ? peak : (spread > 0.0 ? (1.0 - peak) * s[c] / spread : 0.0);
    }
    double total = 0.0;
    for (double v : s) total += v;
    for (double& v : s) v /= total;
    return s;
  }

  std::vector<double> embedding_for(std::size_t k) {
    if (cfg_.embedding_noise == 0.0) return anchors_[k];
    std::vector<double> e = anchors_[k];
    for (double& x : e) x += gauss(cfg_.embedding_noise);
    return normalize(e);
  }

  double confidence() {
    return std::clamp(cfg_.conf_mean + gauss(cfg_.conf_std), 0.01, 1.0);
  }

  BBox jitter(const BBox& b) {
    if (cfg_.box_jitter_std == 0.0) return b;
    BBox j{b.x + gauss(cfg_.box_jitter_std), b.y + gauss(cfg_.box_jitter_std), b.w + gauss(cfg_.box_jitter_std),
           b.h + gauss(cfg_.box_jitter_std)};
    j.w = std::max(j.w, 1.0);
    j.h = std::max(j.h, 1.0);
    return j;
  }

  void emit_detections(FrameIndex frame, std::vector<Detection>& out) {
    const std::size_t n = mice_.size();
    // Each source is either one mouse or a merged pair (first, second).
    std::vector<std::pair<std::size_t, std::size_t>> sources;
    std::vector<char> merged(n, 0);
    if (cfg_.occlusion) {
      for (std::size_t a = 0; a < n; ++a) {
        if (merged[a]) continue;
        for (std::size_t b = a + 1; b < n; ++b) {
          if (merged[b]) continue;
          if (iou(mice_[a].box(), mice_[b].box()) > cfg_.occlusion_iou) {
            merged[a] = merged[b] = 1;
            sources.emplace_back(a, b);
            break;
          }
        }
      }
    }
    for (std::size_t k = 0; k < n; ++k)
      if (!merged[k]) sources.emplace_back(k, k);
    std::sort(sources.begin(), sources.end());

    for (const auto& [a, b] : sources) {
      if (bernoulli(cfg_.miss_rate)) continue;
      Detection d;
      d.frame = frame;
      std::size_t owner = a;
      if (a == b) {
        d.box = jitter(mice_[a].box());
        d.confidence = confidence();
      } else {
        owner = bernoulli(0.5) ? b : a;
        d.box = jitter(union_box(mice_[a].box(), mice_[b].box()));
        d.confidence = std::clamp(0.7 * confidence(), 0.01, 1.0);
      }
      d.tag_scores = tag_scores_for(mouse_identity(owner));
      d.embedding = embedding_for(owner);
      out.push_back(std::move(d));
    }
  }

  const SceneConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<Mouse> mice_;
  std::vector<std::vector<double>> anchors_;
};

}  // namespace

Scene generate(const SceneConfig& cfg) {
  validate(cfg);
  return SceneGenerator(cfg).run();
}

}  // namespace cagetrack
