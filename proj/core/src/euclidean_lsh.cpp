#include "hbe/error.hpp"
#include "hbe/lsh.hpp"

#include <cmath>
#include <numbers>

namespace hbe {

namespace {
const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double collision_prob_euclidean(double c) {
  if (!(c >= 0.0)) throw InputError("normalized distance must be >= 0");
  if (c == 0.0) return 1.0;
  if (c < 1e-8) return 1.0 - kSqrt2OverPi * c;
  if (std::isinf(c)) return 0.0;
  // 1 - 2 Phi(1/c) = erf(1/(c sqrt 2)); 1 - exp(-u) = -expm1(-u).
  double a = std::erf(1.0 / (c * std::numbers::sqrt2));
  double b = kSqrt2OverPi * c * -std::expm1(-0.5 / (c * c));
  return std::max(0.0, a - b);
}

CollisionBound collision_prob_euclidean_bounds(double c, double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) throw DomainError("pointwise bounds need 0 < delta <= 1/2");
  double cmax = std::min(delta, 1.0 / std::sqrt(2.0 * std::log(1.0 / delta)));
  if (!(c >= 0.0 && c <= cmax))
    throw DomainError("c outside the validity region of the pointwise bounds");
  return {std::exp(-kSqrt2OverPi * (1.0 + delta) * c),
          std::exp(-kSqrt2OverPi * (1.0 - delta * delta * delta) * c)};
}

double collision_prob_euclidean_series(double c, int terms) {
  if (!(c > 1.0)) throw DomainError("series expansion requires c > 1");
  if (terms < 1) throw InputError("series needs at least one term");
  double sum = 0.0;
  double fact = 1.0;   // k!
  double pow2 = 1.0;   // 2^k
  double cpow = 1.0 / c;
  for (int k = 0; k < terms; ++k) {
    if (k > 0) {
      fact *= k;
      pow2 *= 2.0;
      cpow /= c * c;
    }
    double term = cpow / (pow2 * fact * (2.0 * k + 2.0) * (2.0 * k + 1.0));
    sum += (k % 2 == 0) ? term : -term;
  }
  return kSqrt2OverPi * sum;
}

EuclideanHash sample_euclidean(double w, int D, std::size_t d, Rng& rng) {
  if (!(w > 0.0) || D < 1 || d < 1) throw InputError("euclidean hash needs w > 0, D >= 1, d >= 1");
  EuclideanHash h;
  h.w = w;
  h.D = D;
  h.d = d;
  h.g.resize(static_cast<std::size_t>(D) * d);
  h.b.resize(D);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, w);
  for (int j = 0; j < D; ++j) {
    for (std::size_t k = 0; k < d; ++k) h.g[j * d + k] = normal(rng);
    h.b[j] = unif(rng);
  }
  return h;
}

void eval_euclidean(const EuclideanHash& h, std::span<const double> x, std::int64_t* out) {
  if (x.size() != h.d) throw InputError("dimension mismatch in eval_euclidean");
  for (int j = 0; j < h.D; ++j) {
    const double* g = h.g.data() + j * h.d;
    double s = h.b[j];
    for (std::size_t k = 0; k < h.d; ++k) s += g[k] * x[k];
    out[j] = static_cast<std::int64_t>(std::ceil(s / h.w));
  }
}

std::vector<std::int64_t> eval_euclidean(const EuclideanHash& h, std::span<const double> x) {
  std::vector<std::int64_t> key(h.D);
  eval_euclidean(h, x, key.data());
  return key;
}

std::uint64_t fingerprint(std::span<const std::int64_t> key) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL ^ key.size();
  for (std::int64_t v : key) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

} // namespace hbe
