#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cagetrack/assoc.hpp"
#include "cagetrack/errors.hpp"
#include "oracles/oracles.hpp"

using namespace cagetrack;

namespace {

CostMatrix matrix(std::vector<std::vector<double>> rows) {
  CostMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

double norm(const Embedding& e) {
  double s = 0;
  for (double x : e) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(Normalize, ThreeFour) {
  const std::vector<double> f{3, 4};
  const auto e = normalize(f);
  EXPECT_DOUBLE_EQ(e[0], 0.6);
  EXPECT_DOUBLE_EQ(e[1], 0.8);
  EXPECT_EQ(normalize(e), e);
}

TEST(Normalize, ZeroVectorThrows) {
  const std::vector<double> z(8, 0.0);
  EXPECT_THROW(normalize(z), NumericError);
}

TEST(CosineCost, ReferencePoints) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{-1, 0};
  EXPECT_EQ(cosine_cost(a, a), 0.0);
  EXPECT_DOUBLE_EQ(cosine_cost(a, b), 0.5);
  EXPECT_DOUBLE_EQ(cosine_cost(a, c), 1.0);
}

TEST(AppearanceBank, FirstObservationSeeds) {
  AppearanceBank bank(0.9);
  const std::vector<double> f{0.6, 0.8};
  bank.update(1, f);
  EXPECT_EQ(bank.at(1), f);
  bank.update(1, f);
  EXPECT_NEAR(bank.at(1)[0], 0.6, 1e-15);
  EXPECT_NEAR(bank.at(1)[1], 0.8, 1e-15);
}

TEST(AppearanceBank, EmaStep) {
  AppearanceBank bank(0.9);
  const std::vector<double> e{1, 0}, f{0, 1};
  bank.update(4, e);
  bank.update(4, f);
  const double n = std::hypot(0.9, 0.1);
  EXPECT_NEAR(bank.at(4)[0], 0.9 / n, 1e-12);
  EXPECT_NEAR(bank.at(4)[1], 0.1 / n, 1e-12);
  EXPECT_NEAR(bank.at(4)[0], 0.9939, 5e-5);
  EXPECT_NEAR(bank.at(4)[1], 0.1104, 5e-5);
}

TEST(AppearanceBank, CancellationFallsBackToObservation) {
  AppearanceBank bank(0.5);
  const std::vector<double> e{1, 0}, f{-1, 0};
  bank.update(2, e);
  bank.update(2, f);
  EXPECT_EQ(bank.at(2), f);
  EXPECT_EQ(bank.fallback_count(), 1u);
}

TEST(AppearanceBank, RejectsAlphaOutsideRange) {
  EXPECT_THROW(AppearanceBank(1.0), ConfigError);
  EXPECT_THROW(AppearanceBank(-0.1), ConfigError);
}

TEST(AppearanceBankProperty, StaysUnitNorm) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 1);
  AppearanceBank bank(0.9);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> f(16);
    for (double& x : f) x = g(rng);
    const TrackId id = k % 5;
    bank.update(id, normalize(f));
    ASSERT_NEAR(norm(bank.at(id)), 1.0, 1e-12);
  }
}

TEST(FuseCosts, Examples) {
  EXPECT_EQ(fuse_costs(matrix({{0}}), matrix({{0}}), 0.9)(0, 0), 0.0);
  EXPECT_NEAR(fuse_costs(matrix({{0.5}}), matrix({{0.2}}), 0.9)(0, 0), 0.47, 1e-15);
  const CostMatrix m = matrix({{0.1, 0.7}, {0.33, 1.0}});
  EXPECT_EQ(fuse_costs(m, matrix({{0.9, 0.2}, {0.4, 0.0}}), 1.0), m);
}

TEST(FuseCosts, GatePropagates) {
  CostMatrix a = matrix({{0.1, 0.2}}), b = matrix({{0.3, 0.4}});
  a.gate(0, 0);
  b.gate(0, 1);
  const CostMatrix f = fuse_costs(a, b, 0.9);
  EXPECT_TRUE(f.is_gated(0, 0));
  EXPECT_TRUE(f.is_gated(0, 1));
}

TEST(FuseCosts, ShapeMismatchThrows) { EXPECT_THROW(fuse_costs(CostMatrix(2, 3), CostMatrix(3, 2), 0.9), ContractError); }

TEST(FuseCostsProperty, MonotoneAndBounded) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 2000; ++k) {
    const double m = u(rng), a = u(rng), l = u(rng), d = u(rng) * (1 - m);
    const double v = fuse_costs(matrix({{m}}), matrix({{a}}), l)(0, 0);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_GE(fuse_costs(matrix({{m + d}}), matrix({{a}}), l)(0, 0), v);
  }
}

TEST(Hungarian, ZeroDiagonal) {
  const auto r = hungarian(matrix({{0, 1}, {1, 0}}));
  EXPECT_EQ(r.matches, (std::vector<Match>{{0, 0}, {1, 1}}));
}

TEST(Hungarian, ThreeByThreeReference) {
  const CostMatrix m = matrix({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
  const auto r = hungarian(m);
  EXPECT_EQ(r.matches, (std::vector<Match>{{0, 1}, {1, 0}, {2, 2}}));
  EXPECT_EQ(r.total_cost(m), 5.0);
}

TEST(Hungarian, AllGatedLeavesEverythingUnmatched) {
  CostMatrix m(2, 3);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) m.gate(r, c);
  const auto res = hungarian(m);
  EXPECT_TRUE(res.matches.empty());
  EXPECT_EQ(res.unmatched_rows.size(), 2u);
  EXPECT_EQ(res.unmatched_cols.size(), 3u);
}

TEST(Hungarian, EmptyMatrix) {
  const auto res = hungarian(CostMatrix(0, 4));
  EXPECT_TRUE(res.matches.empty());
  EXPECT_EQ(res.unmatched_cols.size(), 4u);
}

TEST(Hungarian, TallMatrix) {
  const CostMatrix m = matrix({{5}, {1}, {3}});
  const auto r = hungarian(m);
  EXPECT_EQ(r.matches, (std::vector<Match>{{1, 0}}));
  EXPECT_EQ(r.unmatched_rows, (std::vector<std::size_t>{0, 2}));
}

TEST(Hungarian, GateForcesSecondBest) {
  CostMatrix m = matrix({{0, 1}, {0, 5}});
  m.gate(1, 1);
  const auto r = hungarian(m);
  EXPECT_EQ(r.matches, (std::vector<Match>{{0, 1}, {1, 0}}));
}

TEST(Hungarian, ThresholdDemotes) {
  const CostMatrix m = matrix({{0.2, 0.9}, {0.95, 0.8}});
  const auto r = hungarian(m, 0.7);
  EXPECT_EQ(r.matches, (std::vector<Match>{{0, 0}}));
  EXPECT_EQ(r.unmatched_rows, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.unmatched_cols, (std::vector<std::size_t>{1}));
}

TEST(Hungarian, TiesAreReproducible) {
  const CostMatrix m(4, 4, 1.0);
  const auto a = hungarian(m), b = hungarian(m);
  EXPECT_EQ(a.matches, b.matches);
  EXPECT_EQ(a.matches.size(), 4u);
}

TEST(HungarianProperty, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  std::uniform_int_distribution<int> tick(0, 4096);
  std::bernoulli_distribution gate(0.2);
  for (int k = 0; k < 300; ++k) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    CostMatrix m(rows, cols);
    std::vector<std::vector<double>> d(rows, std::vector<double>(cols));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        m(r, c) = d[r][c] = tick(rng) / 512.0;
        if (k % 2 && gate(rng)) m.gate(r, c);
      }
    const auto got = hungarian(m);
    const auto want = oracle::brute_force_assignment(d, [&](std::size_t r, std::size_t c) { return !m.is_gated(r, c); });
    ASSERT_EQ(got.matches.size(), want.matched);
    ASSERT_EQ(got.total_cost(m), want.cost);
    ASSERT_EQ(got.matches.size() + got.unmatched_rows.size(), rows);
    ASSERT_EQ(got.matches.size() + got.unmatched_cols.size(), cols);
  }
}

TEST(HungarianProperty, ConstantShiftKeepsAssignment) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + k % 6;
    CostMatrix a(n, n), b(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        a(r, c) = u(rng);
        b(r, c) = a(r, c) + 3.0;
      }
    EXPECT_EQ(hungarian(a).matches, hungarian(b).matches);
  }
}
