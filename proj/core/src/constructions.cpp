#include "hbe/construction.hpp"
#include "hbe/error.hpp"

#include <cmath>
#include <numbers>

namespace hbe {

SandwichReport measure_sandwich(const KernelSpec& kernel, const CollisionModel& p_fn, double beta,
                                double R, int points) {
  SandwichReport rep;
  for (int i = 0; i < points; ++i) {
    double r = R * i / (points - 1);
    double k = kernel_at_distance(kernel, r);
    double p = p_fn(r);
    if (!(p > 0.0) || !(k > 0.0)) continue;
    double kb = std::pow(k, beta);
    rep.M = std::max({rep.M, p / kb, kb / p});
    rep.max_ratio = std::max(rep.max_ratio, k / p);
  }
  return rep;
}

static void finish(HbeConstruction& c, double R) {
  CollisionModel p_fn(c.spec);
  SandwichReport rep = measure_sandwich(c.kernel, p_fn, c.beta, R);
  c.M_measured = rep.M;
  c.clamp = rep.max_ratio;
  c.variance.clamp = c.clamp;
}

HbeConstruction make_exponential_hbe(double R, double beta) {
  if (!(R > 0.0)) throw InputError("diameter bound R must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  HbeConstruction c;
  c.method = "hbe-exp";
  c.kernel = {KernelKind::Exponential, 2, 1.0};
  double a = std::ceil(std::sqrt(2.0 * std::numbers::pi) * R);
  int D = static_cast<int>(a * a);
  double w = D / (beta * std::sqrt(std::numbers::pi / 2.0));
  c.spec = EuclideanSpec{w, D};
  c.R = R;
  c.beta = beta;
  c.M = std::sqrt(std::numbers::e);
  c.hash_cost = D;
  c.variance = {VarianceKind::ScaleFree, beta, c.M, 0.0};
  finish(c, R);
  return c;
}

HbeConstruction make_student_hbe(int p, int q) {
  if (p < 1 || q < 1) throw InputError("t-Student HBE needs integers p, q >= 1");
  if (q > p) throw DomainError("t-Student HBE needs q <= p so that beta = q/p <= 1");
  HbeConstruction c;
  c.method = "hbe-student";
  c.kernel = {KernelKind::TStudent, p, 1.0};
  c.spec = EuclideanSpec{std::sqrt(2.0 * std::numbers::pi), q};
  c.R = std::numeric_limits<double>::infinity();
  c.beta = static_cast<double>(q) / p;
  c.M = std::pow(3.0, q);
  c.hash_cost = q;
  c.variance = {VarianceKind::ScaleFree, c.beta, c.M, 0.0};
  // The certificate holds for every r, so k/p <= M k^{1-beta} <= M globally.
  CollisionModel p_fn(c.spec);
  c.M_measured = measure_sandwich(c.kernel, p_fn, c.beta, 1e3, 20001).M;
  c.clamp = c.M;
  c.variance.clamp = c.clamp;
  return c;
}

HbeConstruction make_gaussian_euclid_hbe(double R, double t) {
  if (!(t >= 1.0 && t <= R)) throw DomainError("Gaussian Euclidean HBE needs 1 <= t <= R");
  HbeConstruction c;
  c.method = "hbe-gauss-euclid";
  c.kernel = {KernelKind::Gaussian, 2, 1.0};
  double a = std::ceil(t * R);
  int D = static_cast<int>(3.0 * a * a);
  double w = (D / t) * std::sqrt(2.0 / std::numbers::pi);
  c.spec = EuclideanSpec{w, D};
  c.R = R;
  c.beta = 1.0;
  c.M = std::sqrt(std::numbers::e);
  c.gaussian_t = t;
  c.hash_cost = D;
  c.variance = {VarianceKind::GaussianEuclid, 1.0, 1.0, t};
  CollisionModel p_fn(c.spec);
  // The sandwich is against e^{-rt}, not a power of the kernel.
  double M = 1.0, ratio = 1.0;
  for (int i = 0; i <= 2000; ++i) {
    double r = R * i / 2000.0;
    double p = p_fn(r);
    double e = std::exp(-r * t);
    M = std::max({M, p / e, e / p});
    ratio = std::max(ratio, std::exp(-r * r) / p);
  }
  c.M_measured = M;
  c.clamp = ratio;
  c.variance.clamp = ratio;
  return c;
}

HbeConstruction make_gaussian_ball_hbe(double R, double beta, std::size_t n) {
  if (!(R > 0.0)) throw InputError("diameter bound R must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  HbeConstruction c;
  c.method = "hbe-gauss-ball";
  c.kernel = {KernelKind::Gaussian, 2, 1.0};
  int t = std::max(static_cast<int>(std::ceil(std::pow(R, 4.0 / 3.0))), 12);
  int D = static_cast<int>(std::ceil(8.0 * std::sqrt(static_cast<double>(t)) * R * R / (t - 1.0)));
  D = std::max(D, 1);
  double w = std::sqrt((t - 1.0) * D / (8.0 * beta));
  int U = ball_carving_grid_count(t, n);
  c.spec = BallCarvingSpec{t, w, D, U};
  c.R = R;
  c.beta = beta;
  c.hash_cost = static_cast<double>(D) * t;
  finish(c, R);
  c.M = c.M_measured;
  c.variance = {VarianceKind::ScaleFree, beta, c.M, 0.0, c.clamp};
  return c;
}

HbeConstruction make_construction(const std::string& method, double R, std::size_t n,
                                  const ConstructionParams& params) {
  if (method == "hbe-exp") return make_exponential_hbe(R, params.beta);
  if (method == "hbe-student") return make_student_hbe(params.p, params.q);
  if (method == "hbe-gauss-euclid") return make_gaussian_euclid_hbe(R, params.t);
  if (method == "hbe-gauss-ball") return make_gaussian_ball_hbe(R, params.beta, n);
  throw InputError("unknown HBE method '" + method + "'");
}

} // namespace hbe
