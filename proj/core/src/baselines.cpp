#include "hbe/baselines.hpp"

#include "hbe/error.hpp"

#include <cmath>
#include <numbers>

namespace hbe {

namespace {

std::shared_ptr<const PointSet> unit_points(std::shared_ptr<const PointSet> P, const KernelSpec& kernel) {
  if (kernel.bandwidth == 1.0) return P;
  return std::make_shared<const PointSet>(normalize_bandwidth(*P, kernel).first);
}

double gauss(double sq) { return std::exp(-sq); }

} // namespace

double rs_sample(const PointSet& P, const KernelSpec& kernel, std::span<const double> x, Rng& rng) {
  if (P.n() == 0) throw InputError("random sampling needs a nonempty point set");
  std::uniform_int_distribution<std::size_t> pick(0, P.n() - 1);
  return eval_kernel(kernel, x, P.row(pick(rng)));
}

double rs_variance(double mu) { return 1.0 / mu; }

RandomSamplingSource::RandomSamplingSource(std::shared_ptr<const PointSet> points, KernelSpec kernel,
                                           std::span<const double> x, std::uint64_t seed,
                                           std::vector<double> factors)
    : points_(std::move(points)), kernel_(kernel), x_(x.begin(), x.end()), factors_(std::move(factors)),
      rng_(seed) {
  if (!points_ || points_->n() == 0) throw InputError("random sampling needs a nonempty point set");
  if (x_.size() != points_->d()) throw InputError("dimension mismatch in random sampling query");
  if (!factors_.empty() && factors_.size() != points_->n())
    throw InputError("factor count does not match the point count");
}

double RandomSamplingSource::draw() {
  std::uniform_int_distribution<std::size_t> pick(0, points_->n() - 1);
  std::size_t i = pick(rng_);
  double k = kernel_at_distance(kernel_, distance(x_, points_->row(i)));
  return factors_.empty() ? k : factors_[i] * k;
}

RffSource::RffSource(std::shared_ptr<const PointSet> points, KernelSpec kernel, std::span<const double> x,
                     std::uint64_t seed)
    : rng_(seed) {
  if (kernel.kind != KernelKind::Gaussian) throw UnsupportedError("random Fourier features need the Gaussian kernel");
  if (!points || points->n() == 0) throw InputError("RFF needs a nonempty point set");
  if (x.size() != points->d()) throw InputError("dimension mismatch in RFF query");
  points_ = unit_points(std::move(points), kernel);
  x_ = normalize_query(kernel, x);
  omega_.resize(points_->d());
}

double RffSource::draw() {
  std::normal_distribution<double> normal(0.0, std::numbers::sqrt2);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (auto& w : omega_) w = normal(rng_);
  double b = phase(rng_);
  const std::size_t n = points_->n(), d = points_->d();
  auto proj = [&](std::span<const double> v) {
    double s = b;
    for (std::size_t j = 0; j < d; ++j) s += omega_[j] * v[j];
    return s;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::cos(proj(points_->row(i)));
  return 2.0 / static_cast<double>(n) * std::cos(proj(x_)) * sum;
}

double rff_sample(const PointSet& P, const KernelSpec& kernel, std::span<const double> x, Rng& rng) {
  auto shared = std::make_shared<const PointSet>(P);
  RffSource src(shared, kernel, x, rng());
  return src.draw();
}

double rff_second_moment(const PointSet& P0, const KernelSpec& kernel, std::span<const double> x0) {
  if (kernel.kind != KernelKind::Gaussian) throw UnsupportedError("random Fourier features need the Gaussian kernel");
  auto [P, unit] = normalize_bandwidth(P0, kernel);
  std::vector<double> x = normalize_query(kernel, x0);
  const std::size_t n = P.n(), d = P.d();
  if (n == 0) throw InputError("RFF needs a nonempty point set");
  double diag = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto y = P.row(i);
    diag += 1.0 + 0.5 * gauss(4.0 * squared_distance(x, y));
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto z = P.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        double u = 2.0 * x[k] - y[k] - z[k];
        s += u * u;
      }
      cross += gauss(squared_distance(y, z)) + 0.5 * gauss(s);
    }
  }
  double nn = static_cast<double>(n) * static_cast<double>(n);
  return (diag + cross) / nn;
}

BernoulliSource::BernoulliSource(double mu, std::uint64_t seed, double v) : mu_(mu), v_(v), rng_(seed) {
  if (!(v > 0.0) || !(mu >= 0.0 && mu <= v)) throw InputError("Bernoulli source needs 0 <= mu <= v");
}

double BernoulliSource::draw() {
  std::bernoulli_distribution coin(mu_ / v_);
  return coin(rng_) ? v_ : 0.0;
}

double BernoulliSource::draw_sum(std::uint64_t k) {
  std::binomial_distribution<std::uint64_t> binom(k, mu_ / v_);
  return v_ * static_cast<double>(binom(rng_));
}

} // namespace hbe
