#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cagetrack/core_types.hpp"

namespace cagetrack {

using Embedding = std::vector<double>;

/// Dense row-major cost matrix; rows are tracks, columns are detections.
/// A GATED entry marks a pair that may never be matched.
class CostMatrix {
 public:
  static constexpr double kGated = std::numeric_limits<double>::infinity();

  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  bool is_gated(std::size_t r, std::size_t c) const noexcept { return (*this)(r, c) == kGated; }
  void gate(std::size_t r, std::size_t c) noexcept { (*this)(r, c) = kGated; }

  CostMatrix transposed() const;

  friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Match {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Match&, const Match&) = default;
};

struct AssignmentResult {
  std::vector<Match> matches;  // sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost(const CostMatrix& costs) const noexcept;
};

/// Minimum-cost one-to-one assignment over the non-GATED entries of a
/// rectangular matrix of finite costs. Among assignments it first maximizes
/// the number of non-GATED pairs, then minimizes their summed cost. Ties
/// resolve toward the lowest (row, col) indices, so results are reproducible.
/// Pairs whose cost exceeds `match_threshold` are demoted to unmatched.
AssignmentResult hungarian(const CostMatrix& costs,
                           double match_threshold = std::numeric_limits<double>::infinity());

/// f / |f|. Throws NumericError (ZeroVector) when |f| == 0.
Embedding normalize(std::span<const double> f);

/// (1 - cos)/2 for unit vectors: identical -> 0, orthogonal -> 0.5, antipodal -> 1.
double cosine_cost(std::span<const double> e, std::span<const double> f_hat) noexcept;

/// Per-track exponential moving average of unit-normalized embeddings.
class AppearanceBank {
 public:
  explicit AppearanceBank(double alpha = 0.9);

  double alpha() const noexcept { return alpha_; }

  /// e <- normalize(alpha*e + (1-alpha)*f_hat); the first observation seeds e = f_hat.
  /// When the blend cancels exactly, e falls back to f_hat and the event is counted.
  void update(TrackId track, std::span<const double> f_hat);

  bool contains(TrackId track) const noexcept { return entries_.contains(track); }
  const Embedding& at(TrackId track) const { return entries_.at(track); }
  void erase(TrackId track) { entries_.erase(track); }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t fallback_count() const noexcept { return fallbacks_; }

 private:
  double alpha_;
  std::map<TrackId, Embedding> entries_;
  std::size_t fallbacks_ = 0;
};

/// lambda*motion + (1-lambda)*appearance, GATED if either input is.
/// Throws ContractError (ShapeMismatch) on differing shapes.
CostMatrix fuse_costs(const CostMatrix& motion, const CostMatrix& appearance, double lambda);

}  // namespace cagetrack
