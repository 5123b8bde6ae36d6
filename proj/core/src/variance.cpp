#include "hbe/variance_bounds.hpp"

#include "hbe/error.hpp"

#include <cmath>

namespace hbe {

static void check_profile(std::span<const double> weights, std::span<const double> probs) {
  if (weights.size() != probs.size()) throw InputError("weights and probs differ in length");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0 && probs[i] <= 1.0)) throw InputError("probabilities must lie in (0, 1]");
    if (!(weights[i] >= 0.0 && weights[i] <= 1.0)) throw InputError("weights must lie in [0, 1]");
    if (i > 0 && probs[i] > probs[i - 1]) throw InputError("probabilities must be sorted non-increasing");
  }
}

double second_moment_upper_bound(std::span<const double> weights, std::span<const double> probs,
                                 std::size_t n) {
  check_profile(weights, probs);
  if (n == 0) throw InputError("n must be positive");
  const std::size_t m = probs.size();
  // Suffix sums of p_j.
  double tail = 0.0;
  double total = 0.0;
  for (std::size_t k = m; k-- > 0;) {
    double term = weights[k] * weights[k] / probs[k] * (static_cast<double>(k + 1) + tail / probs[k]);
    total += term;
    tail += probs[k];
  }
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

TwoPointBound two_point_variance_bound(std::span<const double> weights, std::span<const double> probs,
                                       double mu) {
  check_profile(weights, probs);
  for (double w : weights)
    if (!(w > 0.0)) throw InputError("weights must lie in (0, 1]");
  if (!(mu > 0.0)) throw InputError("mu must be positive");
  const std::size_t m = probs.size();
  TwoPointBound out;
  double best = -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    double fi = std::min(1.0, mu / weights[i]);
    double wi2 = weights[i] * weights[i];
    for (std::size_t j = 0; j < m; ++j) {
      double fj = std::min(1.0, mu / weights[j]);
      double a = j <= i ? wi2 / probs[i] : wi2 / (probs[i] * probs[i]) * probs[j];
      double v = fi * a * fj;
      if (v > best) {
        best = v;
        out.i = i;
        out.j = j;
      }
    }
  }
  out.bound.value = 4.0 * best;
  out.bound.relative = out.bound.value / (mu * mu);
  return out;
}

VarianceBound scale_free_variance_bound(double beta, double M, double mu, double tau_loc, double gamma_loc) {
  if (!(beta >= 0.5 && beta <= 1.0)) throw DomainError("scale-free bound needs beta in [1/2, 1]");
  if (!(M >= 1.0)) throw DomainError("scale-free bound needs M >= 1");
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("mu must lie in (0, 1]");
  if (!(tau_loc >= mu && tau_loc <= 1.0)) throw DomainError("localization tau must lie in [mu, 1]");
  if (!(gamma_loc >= 0.0 && gamma_loc <= 1.0)) throw DomainError("localization gamma must lie in [0, 1]");
  double braces = 2.0 * std::pow(tau_loc, beta) + std::pow(gamma_loc, 2.0 - beta) +
                  std::pow(tau_loc, 2.0 * beta - 1.0) * std::pow(gamma_loc, beta);
  VarianceBound b;
  b.relative = M * M * M * braces * std::pow(mu, -beta);
  b.value = mu * mu * b.relative;
  return b;
}

} // namespace hbe
