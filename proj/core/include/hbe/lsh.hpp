#pragma once

#include "hbe/random.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hbe {

struct CollisionBound {
  double lower = 0.0;
  double upper = 0.0;
};

// ---- Euclidean (line partition) LSH ----

// Standard normal upper tail P[N > z].
double normal_upper_tail(double z);

// Exact collision probability of one line-partition hash at normalized distance c = r/w.
double collision_prob_euclidean(double c);

// Pointwise exponential bounds; valid for 0 < delta <= 1/2 and c <= min(delta, 1/sqrt(2 ln(1/delta))).
CollisionBound collision_prob_euclidean_bounds(double c, double delta);

// Partial sum of the alternating series for c > 1 using the first `terms` terms.
double collision_prob_euclidean_series(double c, int terms);

struct EuclideanHash {
  double w = 1.0;
  int D = 1;
  std::size_t d = 0;
  std::vector<double> g;  // D x d, row-major
  std::vector<double> b;  // D offsets in [0, w)
};

EuclideanHash sample_euclidean(double w, int D, std::size_t d, Rng& rng);

std::vector<std::int64_t> eval_euclidean(const EuclideanHash& h, std::span<const double> x);
void eval_euclidean(const EuclideanHash& h, std::span<const double> x, std::int64_t* out);

// 64-bit fingerprint of an integer key.
std::uint64_t fingerprint(std::span<const std::int64_t> key);

// ---- Ball-carving LSH ----
//
// Each copy projects to t dimensions with a Gaussian matrix scaled by 1/sqrt(t) and
// carves balls of radius w from U shifted copies of the D_t lattice scaled by sqrt(2) w
// (minimum center distance 2w). A point takes the first grid whose ball contains it.

double unit_ball_volume(int t);

// Probability that one shifted grid covers a fixed point.
double ball_grid_cover_prob(int t);

// U = ceil(ln(100 n_hint) / q); ConfigError above 10^6.
int ball_carving_grid_count(int t, std::size_t n_hint);

// Nearest point of D_t to y - shift; writes it to z and returns the squared distance.
double nearest_dt_point(const double* y, const double* shift, int t, std::int32_t* z);

class BallCarvingHash {
public:
  // Lazily generated per-copy shifts; owned by the caller, reusable across points.
  struct Workspace {
    std::vector<std::vector<double>> shifts;
    std::uint64_t owner = 0;  // shift_key of the hash the cached shifts belong to
    std::vector<double> proj;
    std::vector<std::int32_t> z;
  };

  BallCarvingHash() = default;
  BallCarvingHash(int t, double w, int D, int U, std::size_t d, Rng& rng);

  int t() const { return t_; }
  double w() const { return w_; }
  int D() const { return D_; }
  int U() const { return U_; }
  std::size_t d() const { return d_; }

  // Projected coordinates of x for one copy, in lattice units (divided by sqrt(2) w).
  void project(int copy, std::span<const double> x, double* out) const;
  const double* shift(int copy, int u, Workspace& ws) const;

  // First grid index in [0, limit) covering the projected point, or -1; z receives the center.
  int first_cover(int copy, const double* y, int limit, Workspace& ws, std::int32_t* z) const;

  // Flattened key: per copy (u, z_1..z_t), or (-1, token, 0...) when no grid covers, with a token
  // derived from the coordinates of x so that only identical points share it.
  std::vector<std::int64_t> key(std::span<const double> x, Workspace& ws) const;
  std::uint64_t key_fingerprint(std::span<const double> x, Workspace& ws) const;

  // Squared ball radius in lattice units.
  static constexpr double radius2 = 0.5;

  const std::vector<double>& projections() const { return proj_; }
  std::uint64_t shift_key() const { return shift_key_; }

private:
  int t_ = 0;
  double w_ = 1.0;
  int D_ = 0;
  int U_ = 0;
  std::size_t d_ = 0;
  std::vector<double> proj_;  // D x t x d, already scaled by 1/(sqrt(t) sqrt(2) w)
  std::uint64_t shift_key_ = 0;
};

BallCarvingHash sample_ball_carving(int t, double w, int D, std::size_t d, std::size_t n_hint, Rng& rng);

std::vector<std::int64_t> eval_ball_carving(const BallCarvingHash& h, std::span<const double> x);

// Lemma bounds on the per-copy collision probability; t >= 12 and 16/(t+7) <= c^2 <= 1.
CollisionBound collision_prob_ball_bounds(int t, double c);

enum class TailSide { Below, Above };

// Exponential chi-square tail bound at ratio a (a < 1 below, a > 1 above).
double chi_square_tail(int t, double a, TailSide side);

// Collision probability of two points at projected distance rho*w inside one grid sequence
// of U grids: I/(1-I) * (1 - (1 - q(2-2I))^U) with I the cap fraction at half-distance.
double ball_pair_collision(int t, double rho, int U);

// Per-copy collision probability at normalized distance c = r/w, averaging over the
// chi-square distributed projected length. Direct quadrature; exactly 1 at c = 0.
double ball_copy_collision_prob(int t, double c, int U);

// Tabulated version of ball_copy_collision_prob (cached per (t, U)).
class BallCollisionTable {
public:
  BallCollisionTable(int t, int U);
  double operator()(double c) const;
  int t() const { return t_; }
  int U() const { return U_; }

private:
  int t_;
  int U_;
  double c_max_;
  double h_;
  std::vector<double> logp_;
};

const BallCollisionTable& ball_collision_table(int t, int U);

} // namespace hbe
