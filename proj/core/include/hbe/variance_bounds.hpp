#pragma once

#include <cstddef>
#include <span>

namespace hbe {

struct VarianceBound {
  double value = 0.0;     // bound on E[Z^2]
  double relative = 0.0;  // value / mu^2
};

// (1/n^2) sum_i (w_i^2/p_i) (i + sum_{j>i} p_j/p_i), probs sorted non-increasing, i 1-based.
double second_moment_upper_bound(std::span<const double> weights, std::span<const double> probs,
                                 std::size_t n);

struct TwoPointBound {
  VarianceBound bound;
  std::size_t i = 0;  // maximizing pair (0-based)
  std::size_t j = 0;
};

// 4 max_{ij} f_i A_ij f_j with f_i = min(1, mu/w_i),
// A_ij = (w_i^2/p_i) [j <= i] + (w_i^2/p_i^2) p_j [j > i].
TwoPointBound two_point_variance_bound(std::span<const double> weights, std::span<const double> probs,
                                       double mu);

// mu^2 M^3 {2 tau^beta + gamma^{2-beta} + tau^{2 beta - 1} gamma^beta} mu^{-beta}.
VarianceBound scale_free_variance_bound(double beta, double M, double mu, double tau_loc, double gamma_loc);

} // namespace hbe
