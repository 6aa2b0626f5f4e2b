#include "cagetrack/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "cagetrack/errors.hpp"

namespace cagetrack {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw ContractError("ShapeMismatch: data size does not match rows*cols");
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double AssignmentResult::total_cost(const CostMatrix& costs) const noexcept {
  double total = 0.0;
  for (const auto& m : matches) total += costs(m.row, m.col);
  return total;
}

namespace {

// Shortest augmenting path with row/column potentials (Kuhn-Munkres in the
// Jonker-Volgenant formulation). Requires rows <= cols; every entry finite.
// Returns, for each row, the assigned column.
std::vector<std::size_t> solve_dense(const CostMatrix& a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  const double inf = std::numeric_limits<double>::infinity();

  // 1-based bookkeeping; index 0 is the virtual source column.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

AssignmentResult hungarian(const CostMatrix& costs, double match_threshold) {
  AssignmentResult result;
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  if (rows == 0 || cols == 0) {
    for (std::size_t r = 0; r < rows; ++r) result.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) result.unmatched_cols.push_back(c);
    return result;
  }

  // The solver wants rows <= cols.
  const bool transpose = rows > cols;
  const CostMatrix flipped = transpose ? costs.transposed() : CostMatrix{};
  const CostMatrix& src = transpose ? flipped : costs;

  // Replace GATED entries by a penalty large enough that any assignment using
  // fewer gated pairs beats one using more, whatever the finite costs are.
  double lo = 0.0, hi = 0.0;
  bool any_finite = false;
  for (std::size_t r = 0; r < src.rows(); ++r) {
    for (std::size_t c = 0; c < src.cols(); ++c) {
      if (src.is_gated(r, c)) continue;
      const double x = src(r, c);
      if (!any_finite) {
        lo = hi = x;
        any_finite = true;
      }
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!any_finite) {
    for (std::size_t r = 0; r < rows; ++r) result.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) result.unmatched_cols.push_back(c);
    return result;
  }
  const double span = hi - lo;
  const double penalty = hi + static_cast<double>(src.rows() + 1) * (span + 1.0);
  CostMatrix work = src;
  for (std::size_t r = 0; r < work.rows(); ++r)
    for (std::size_t c = 0; c < work.cols(); ++c)
      if (work.is_gated(r, c)) work(r, c) = penalty;

  const auto row_to_col = solve_dense(work);

  std::vector<char> row_used(rows, 0), col_used(cols, 0);
  for (std::size_t i = 0; i < row_to_col.size(); ++i) {
    const std::size_t r = transpose ? row_to_col[i] : i;
    const std::size_t c = transpose ? i : row_to_col[i];
    if (costs.is_gated(r, c)) continue;
    if (costs(r, c) > match_threshold) continue;
    result.matches.push_back({r, c});
    row_used[r] = 1;
    col_used[c] = 1;
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const Match& x, const Match& y) { return x.row < y.row; });
  for (std::size_t r = 0; r < rows; ++r)
    if (!row_used[r]) result.unmatched_rows.push_back(r);
  for (std::size_t c = 0; c < cols; ++c)
    if (!col_used[c]) result.unmatched_cols.push_back(c);
  return result;
}

Embedding normalize(std::span<const double> f) {
  double sq = 0.0;
  for (double x : f) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) throw NumericError("ZeroVector: cannot normalize an all-zero embedding");
  Embedding out(f.begin(), f.end());
  for (double& x : out) x /= norm;
  return out;
}

double cosine_cost(std::span<const double> e, std::span<const double> f_hat) noexcept {
  double dot = 0.0;
  const std::size_t n = std::min(e.size(), f_hat.size());
  for (std::size_t i = 0; i < n; ++i) dot += e[i] * f_hat[i];
  return std::clamp((1.0 - dot) / 2.0, 0.0, 1.0);
}

AppearanceBank::AppearanceBank(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("assoc.ema_alpha", "must lie in [0, 1)");
}

void AppearanceBank::update(TrackId track, std::span<const double> f_hat) {
  auto it = entries_.find(track);
  if (it == entries_.end()) {
    entries_.emplace(track, normalize(f_hat));
    return;
  }
  Embedding& e = it->second;
  if (e.size() != f_hat.size()) throw ContractError("embedding dimension changed for track");
  Embedding blend(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) blend[i] = alpha_ * e[i] + (1.0 - alpha_) * f_hat[i];
  try {
    e = normalize(blend);
  } catch (const NumericError&) {
    ++fallbacks_;
    std::clog << "appearance: EMA cancelled to zero for track " << track << ", reseeding\n";
    e = normalize(f_hat);
  }
}

CostMatrix fuse_costs(const CostMatrix& motion, const CostMatrix& appearance, double lambda) {
  if (motion.rows() != appearance.rows() || motion.cols() != appearance.cols()) {
    throw ContractError("ShapeMismatch: motion and appearance matrices differ in shape");
  }
  CostMatrix out(motion.rows(), motion.cols());
  for (std::size_t r = 0; r < motion.rows(); ++r) {
    for (std::size_t c = 0; c < motion.cols(); ++c) {
      if (motion.is_gated(r, c) || appearance.is_gated(r, c)) {
        out.gate(r, c);
      } else if (lambda == 1.0) {
        out(r, c) = motion(r, c);
      } else {
        out(r, c) = lambda * motion(r, c) + (1.0 - lambda) * appearance(r, c);
      }
    }
  }
  return out;
}

}  // namespace cagetrack
