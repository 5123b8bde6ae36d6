#include <hbe/construction.hpp>
#include <hbe/diagnostics.hpp>
#include <hbe/error.hpp>
#include <hbe/lsh.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace hbe;

TEST(EuclideanLsh, SameSeedSameHash) {
  Rng a(42), b(42);
  auto h1 = sample_euclidean(2.0, 3, 5, a);
  auto h2 = sample_euclidean(2.0, 3, 5, b);
  EXPECT_EQ(h1.g, h2.g);
  EXPECT_EQ(h1.b, h2.b);
}

TEST(EuclideanLsh, KeyMatchesDefinition) {
  Rng rng(3);
  auto h = sample_euclidean(1.7, 1, 4, rng);
  std::vector<double> x{0.3, -2.0, 1.1, 0.25};
  double s = h.b[0];
  for (int k = 0; k < 4; ++k) s += h.g[k] * x[k];
  EXPECT_EQ(eval_euclidean(h, x)[0], static_cast<std::int64_t>(std::ceil(s / 1.7)));
}

TEST(EuclideanLsh, HalfOffsetAtOrigin) {
  EuclideanHash h{1.0, 1, 2, {0.7, -0.4}, {0.5}};
  std::vector<double> x{0.0, 0.0};
  EXPECT_EQ(eval_euclidean(h, x)[0], 1);
}

TEST(EuclideanLsh, ShiftAlongDirectionMovesKeyByOne) {
  EuclideanHash h{1.3, 1, 2, {0.6, 0.8}, {0.0}};
  std::vector<double> x{0.21, 0.4};
  double gg = 0.6 * 0.6 + 0.8 * 0.8;
  std::vector<double> y{x[0] + 1.3 * 0.6 / gg, x[1] + 1.3 * 0.8 / gg};
  EXPECT_EQ(eval_euclidean(h, y)[0], eval_euclidean(h, x)[0] + 1);
}

TEST(EuclideanLsh, DimensionMismatch) {
  Rng rng(1);
  auto h = sample_euclidean(1.0, 2, 3, rng);
  std::vector<double> x{1.0};
  EXPECT_THROW(eval_euclidean(h, x), InputError);
}

TEST(EuclideanLsh, OffsetsUniform) {
  Rng rng(9);
  const double w = 2.5;
  std::vector<double> b;
  for (int i = 0; i < 100000; ++i) b.push_back(sample_euclidean(w, 1, 1, rng).b[0] / w);
  std::sort(b.begin(), b.end());
  double D = 0.0;
  const double n = static_cast<double>(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    D = std::max({D, (i + 1) / n - b[i], b[i] - i / n});
  // Asymptotic Kolmogorov critical value at the 1% level.
  EXPECT_LT(D * std::sqrt(n), 1.6276);
}

TEST(EuclideanLsh, ClosedFormMatchesQuadrature) {
  for (double c : {1e-6, 0.01, 0.25, 0.5, 1.0, 2.0, 5.0, 50.0})
    EXPECT_NEAR(collision_prob_euclidean(c), tsup::p1_quadrature(c), 1e-12) << c;
  EXPECT_NEAR(collision_prob_euclidean(1.0), 0.3687, 1e-4);
}

TEST(EuclideanLsh, ClosedFormLimits) {
  EXPECT_EQ(collision_prob_euclidean(0.0), 1.0);
  EXPECT_LT(collision_prob_euclidean(1e6), 1e-6);
  EXPECT_THROW(collision_prob_euclidean(-0.1), InputError);
  double prev = 1.0;
  for (int i = 1; i < 1000; ++i) {
    double v = collision_prob_euclidean(0.01 * i);
    EXPECT_LE(v, prev);
    EXPECT_GE(v, 0.0);
    prev = v;
  }
}

TEST(EuclideanLsh, SmallDistanceFirstOrderForm) {
  double c = 1e-9;
  EXPECT_DOUBLE_EQ(collision_prob_euclidean(c), 1.0 - std::sqrt(2.0 / std::numbers::pi) * c);
}

TEST(EuclideanLsh, MonteCarloMatchesClosedForm) {
  Rng rng(2024);
  for (double c : {0.25, 0.5, 1.0, 2.0}) {
    std::vector<double> x{0.0, 0.0, 0.0}, y{c, 0.0, 0.0};
    auto r = empirical_collision_rate(EuclideanSpec{1.0, 1}, x, y, 100000, rng);
    EXPECT_NEAR(r.rate, collision_prob_euclidean(c), 0.01) << c;
  }
}

TEST(EuclideanLsh, ConcatenationRaisesToPowerD) {
  Rng rng(77);
  std::vector<double> x{0.0, 0.0}, y{0.3, 0.4};
  auto r = empirical_collision_rate(EuclideanSpec{2.0, 3}, x, y, 100000, rng);
  EXPECT_NEAR(r.rate, std::pow(collision_prob_euclidean(0.25), 3), 0.01);
}

TEST(EuclideanLsh, PointwiseBoundsExample) {
  auto b = collision_prob_euclidean_bounds(0.5, 0.5);
  EXPECT_NEAR(b.lower, 0.5497, 1e-4);
  EXPECT_NEAR(b.upper, 0.7053, 1e-4);
  double p = collision_prob_euclidean(0.5);
  EXPECT_NEAR(p, 0.6096, 1e-4);
  EXPECT_LT(b.lower, p);
  EXPECT_LT(p, b.upper);
  auto z = collision_prob_euclidean_bounds(0.0, 0.3);
  EXPECT_EQ(z.lower, 1.0);
  EXPECT_EQ(z.upper, 1.0);
}

TEST(EuclideanLsh, PointwiseBoundsSweep) {
  for (double delta : {0.05, 0.1, 0.25, 0.4, 0.5}) {
    double cmax = std::min(delta, 1.0 / std::sqrt(2.0 * std::log(1.0 / delta)));
    for (int i = 0; i < 100; ++i) {
      double c = cmax * i / 99.0;
      auto b = collision_prob_euclidean_bounds(c, delta);
      double p = collision_prob_euclidean(c);
      EXPECT_LE(b.lower, p);
      EXPECT_LE(p, b.upper);
    }
  }
}

TEST(EuclideanLsh, PointwiseBoundsDomain) {
  EXPECT_THROW(collision_prob_euclidean_bounds(0.6, 0.5), DomainError);
  EXPECT_THROW(collision_prob_euclidean_bounds(0.1, 0.6), DomainError);
}

TEST(EuclideanLsh, SeriesLeadingTerm) {
  double lead = collision_prob_euclidean_series(10.0, 1);
  EXPECT_NEAR(lead, std::sqrt(2.0 / std::numbers::pi) / 20.0, 1e-15);
  EXPECT_NEAR(lead, 0.0399, 1e-4);
  double second = std::sqrt(2.0 / std::numbers::pi) / (2.0 * 4.0 * 3.0 * 1000.0);
  EXPECT_LT(std::fabs(collision_prob_euclidean(10.0) - lead), second);
}

TEST(EuclideanLsh, SeriesAgreesAtTwo) {
  EXPECT_NEAR(collision_prob_euclidean_series(2.0, 8), collision_prob_euclidean(2.0), 1e-8);
}

TEST(EuclideanLsh, SeriesPartialSumsBracket) {
  for (double c : {1.5, 2.0, 4.0}) {
    double exact = collision_prob_euclidean(c);
    for (int k = 1; k < 8; ++k) {
      double a = collision_prob_euclidean_series(c, k), b = collision_prob_euclidean_series(c, k + 1);
      EXPECT_LE(std::min(a, b), exact + 1e-15);
      EXPECT_GE(std::max(a, b), exact - 1e-15);
    }
  }
  EXPECT_THROW(collision_prob_euclidean_series(1.0, 3), DomainError);
}

TEST(BallCarving, CoverProbabilityAndGridCount) {
  EXPECT_NEAR(ball_grid_cover_prob(12), 0.0104, 1e-4);
  int U = ball_carving_grid_count(12, 1000);
  EXPECT_EQ(U, static_cast<int>(std::ceil(std::log(1e5) / ball_grid_cover_prob(12))));
  EXPECT_THROW(ball_carving_grid_count(40, 1000), ConfigError);
}

TEST(BallCarving, NearestLatticePointIsNearest) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t : {2, 3, 12}) {
    std::vector<double> y(t), shift(t, 0.0);
    std::vector<std::int32_t> z(t);
    for (int rep = 0; rep < 2000; ++rep) {
      for (auto& v : y) v = u(rng);
      double d2 = nearest_dt_point(y.data(), shift.data(), t, z.data());
      long sum = 0;
      for (auto v : z) sum += v;
      EXPECT_EQ(sum % 2, 0);
      // Brute force over the 3^t neighbourhood of the rounded point (t <= 3) or
      // coordinate flips (t = 12).
      double best = 1e300;
      if (t <= 3) {
        int total = 1;
        for (int k = 0; k < t; ++k) total *= 5;
        for (int m = 0; m < total; ++m) {
          int mm = m;
          long s = 0;
          double dd = 0.0;
          for (int k = 0; k < t; ++k) {
            long c = static_cast<long>(std::floor(y[k])) + (mm % 5) - 2;
            mm /= 5;
            s += c;
            dd += (y[k] - c) * (y[k] - c);
          }
          if (s % 2 == 0) best = std::min(best, dd);
        }
        EXPECT_NEAR(d2, best, 1e-12);
      }
      double check = 0.0;
      for (int k = 0; k < t; ++k) check += (y[k] - z[k]) * (y[k] - z[k]);
      EXPECT_NEAR(d2, check, 1e-9);
    }
  }
}

TEST(BallCarving, SameSeedSameHash) {
  Rng a(8), b(8);
  auto h1 = sample_ball_carving(12, 3.0, 2, 4, 1000, a);
  auto h2 = sample_ball_carving(12, 3.0, 2, 4, 1000, b);
  std::vector<double> x{0.1, 0.2, -0.3, 1.0};
  EXPECT_EQ(h1.projections(), h2.projections());
  EXPECT_EQ(eval_ball_carving(h1, x), eval_ball_carving(h2, x));
}

TEST(BallCarving, IdenticalPointsShareKey) {
  Rng rng(12);
  std::vector<double> x{0.4, -0.1, 0.9}, x2(x);
  int uncovered = 0;
  for (int rep = 0; rep < 200; ++rep) {
    // Tiny n_hint leaves about 1% of copies uncovered.
    auto h = sample_ball_carving(12, 2.0, 3, 3, 1, rng);
    auto k1 = eval_ball_carving(h, x), k2 = eval_ball_carving(h, x2);
    EXPECT_EQ(k1, k2);
    for (int c = 0; c < 3; ++c) uncovered += k1[c * 13] < 0;
  }
  EXPECT_GT(uncovered, 0);
}

TEST(BallCarving, UncoveredDistinctPointsNeverCollide) {
  BallCarvingHash h;
  Rng rng(13);
  // U = 1 leaves most points uncovered.
  h = BallCarvingHash(12, 1.0, 1, 1, 2, rng);
  BallCarvingHash::Workspace ws;
  std::vector<double> x{0.0, 0.0}, y{1e-9, 0.0};
  auto kx = h.key(x, ws), ky = h.key(y, ws);
  if (kx[0] < 0 || ky[0] < 0) EXPECT_NE(kx, ky);
}

TEST(BallCarving, LatticeCenterMapsToGridZero) {
  Rng rng(14);
  auto h = sample_ball_carving(2, 1.0, 1, 2, 10, rng);
  BallCarvingHash::Workspace ws;
  const double* s = h.shift(0, 0, ws);
  // Pick x whose projection lands on the lattice point s + (1, 1) of grid 0.
  const double* A = h.projections().data();
  double target[2] = {s[0] + 1.0, s[1] + 1.0};
  double det = A[0] * A[3] - A[1] * A[2];
  std::vector<double> x{(target[0] * A[3] - A[1] * target[1]) / det, (A[0] * target[1] - A[2] * target[0]) / det};
  auto k = eval_ball_carving(h, x);
  EXPECT_EQ(k[0], 0);
  EXPECT_EQ(k[1], 1);
  EXPECT_EQ(k[2], 1);
}

TEST(BallCarving, CoverageAboveNinetyNinePercent) {
  Rng rng(31);
  std::normal_distribution<double> g;
  int uncovered = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    auto h = sample_ball_carving(12, 1.0, 1, 2, 1000, rng);
    std::vector<double> x{g(rng), g(rng)};
    if (eval_ball_carving(h, x)[0] < 0) ++uncovered;
  }
  EXPECT_LT(uncovered, trials / 100);
}

TEST(BallCarving, BallsInOneGridAreDisjoint) {
  // Distinct points of D_t are at distance >= sqrt(2) in lattice units, twice the radius.
  for (int t : {2, 5, 12}) {
    std::vector<std::int32_t> a(t, 0), b(t, 0);
    b[0] = 1;
    b[1] = 1;
    double d2 = 0.0;
    for (int k = 0; k < t; ++k) d2 += double(a[k] - b[k]) * (a[k] - b[k]);
    EXPECT_GE(std::sqrt(d2), 2.0 * std::sqrt(BallCarvingHash::radius2) - 1e-15);
  }
}

TEST(BallCarving, ChiSquareTailExamples) {
  EXPECT_NEAR(chi_square_tail(20, 2.0, TailSide::Above), std::exp(-(2.0 - std::log(2.0) - 1.0) * 10.0), 1e-15);
  EXPECT_NEAR(chi_square_tail(20, 2.0, TailSide::Above), 0.0465, 1e-4);
  EXPECT_NEAR(chi_square_tail(20, 0.5, TailSide::Below), std::exp(-1.9314718055994531), 1e-12);
  EXPECT_NEAR(chi_square_tail(20, 1.0 + 1e-9, TailSide::Above), 1.0, 1e-9);
  EXPECT_NEAR(chi_square_tail(20, 1.0 - 1e-9, TailSide::Below), 1.0, 1e-9);
  EXPECT_THROW(chi_square_tail(20, 0.5, TailSide::Above), DomainError);
  EXPECT_THROW(chi_square_tail(20, 2.0, TailSide::Below), DomainError);
}

TEST(BallCarving, ChiSquareTailDominatesMonteCarlo) {
  Rng rng(99);
  std::chi_squared_distribution<double> chi(20);
  int above = 0, below = 0;
  const int trials = 1000000;
  for (int i = 0; i < trials; ++i) {
    double x = chi(rng);
    if (x > 40.0) ++above;
    if (x <= 10.0) ++below;
  }
  EXPECT_LT(above / double(trials), chi_square_tail(20, 2.0, TailSide::Above));
  EXPECT_LT(below / double(trials), chi_square_tail(20, 0.5, TailSide::Below));
}

TEST(BallCarving, BoundsOrderedAndMonotone) {
  for (int t : {12, 20, 40})
    for (int i = 0; i <= 20; ++i) {
      double c = std::sqrt(16.0 / (t + 7.0)) + (1.0 - std::sqrt(16.0 / (t + 7.0))) * i / 20.0;
      auto b = collision_prob_ball_bounds(t, c);
      EXPECT_LE(b.lower, b.upper);
      EXPECT_GT(b.lower, 0.0);
    }
  EXPECT_LT(collision_prob_ball_bounds(20, 1.0).upper, collision_prob_ball_bounds(20, 0.8).upper);
  EXPECT_THROW(collision_prob_ball_bounds(12, 0.5), DomainError);
  EXPECT_THROW(collision_prob_ball_bounds(10, 1.0), DomainError);
}

TEST(BallCarving, MonteCarloInsideLemmaBracket) {
  const int t = 12;
  Rng rng(4242);
  for (double c : {std::sqrt(16.0 / 19.0), 0.96, 1.0}) {
    std::vector<double> x{0.0, 0.0}, y{c, 0.0};
    auto spec = BallCarvingSpec{t, 1.0, 1, ball_carving_grid_count(t, 1000)};
    auto r = empirical_collision_rate(spec, x, y, 100000, rng);
    auto b = collision_prob_ball_bounds(t, c);
    EXPECT_GE(r.rate + 3.0 * r.se, b.lower) << c;
    EXPECT_LE(r.rate - 3.0 * r.se, b.upper) << c;
  }
}

TEST(BallCarving, ExactCollisionProbabilityMatchesMonteCarlo) {
  const int t = 12;
  const int U = ball_carving_grid_count(t, 1000);
  Rng rng(777);
  for (double c : {0.0, 0.2, 0.5, 0.9, 1.3}) {
    std::vector<double> x{0.0, 0.0, 0.0}, y{c, 0.0, 0.0};
    auto r = empirical_collision_rate(BallCarvingSpec{t, 1.0, 1, U}, x, y, 100000, rng);
    double p = ball_copy_collision_prob(t, c, U);
    EXPECT_NEAR(r.rate, p, 3.0 * r.se + 0.02 * p + 1e-4) << c;
  }
}

TEST(BallCarving, CollisionNonIncreasingInDistance) {
  const int t = 12;
  const int U = ball_carving_grid_count(t, 1000);
  double prev = 1.0;
  for (int i = 0; i <= 40; ++i) {
    double p = ball_copy_collision_prob(t, 0.05 * i, U);
    EXPECT_LE(p, prev + 1e-12);
    prev = p;
  }
  Rng rng(3);
  double prev_rate = 1.0;
  for (double c : {0.0, 0.4, 0.8, 1.2}) {
    std::vector<double> x{0.0}, y{c};
    auto r = empirical_collision_rate(BallCarvingSpec{t, 1.0, 1, U}, x, y, 20000, rng);
    EXPECT_LE(r.rate, prev_rate + 4.0 * r.se + 1e-12);
    prev_rate = r.rate;
  }
}

TEST(BallCarving, TableMatchesDirectQuadrature) {
  const int t = 12;
  const int U = ball_carving_grid_count(t, 1000);
  const auto& table = ball_collision_table(t, U);
  for (double c : {0.0, 0.013, 0.31, 0.77, 1.5, 2.2, 3.9, 4.5}) {
    double exact = ball_copy_collision_prob(t, c, U);
    EXPECT_NEAR(table(c), exact, 1e-6 * exact + 1e-300) << c;
  }
}
