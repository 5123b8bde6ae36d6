#include "hbe/kernels.hpp"

#include "hbe/error.hpp"

#include <algorithm>
#include <cmath>

namespace hbe {

std::string to_string(KernelKind kind) {
  switch (kind) {
  case KernelKind::Gaussian: return "gaussian";
  case KernelKind::Exponential: return "exponential";
  case KernelKind::TStudent: return "student";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "gaussian") return KernelKind::Gaussian;
  if (name == "exponential" || name == "laplace") return KernelKind::Exponential;
  if (name == "student" || name == "t-student") return KernelKind::TStudent;
  throw InputError("unknown kernel '" + name + "' (expected gaussian, exponential or student)");
}

double unit_kernel(KernelKind kind, int p, double r) {
  switch (kind) {
  case KernelKind::Gaussian: return std::exp(-r * r);
  case KernelKind::Exponential: return std::exp(-r);
  case KernelKind::TStudent: return 1.0 / (1.0 + std::pow(r, p));
  }
  return 0.0;
}

double kernel_at_distance(const KernelSpec& k, double r) {
  return unit_kernel(k.kind, k.p, r / k.bandwidth);
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = x[i] - y[i];
    s += t * t;
  }
  return s;
}

double distance(std::span<const double> x, std::span<const double> y) {
  return std::sqrt(squared_distance(x, y));
}

static void check_point(std::span<const double> x, std::size_t d) {
  if (x.size() != d)
    throw InputError("dimension mismatch: expected " + std::to_string(d) + ", got " +
                     std::to_string(x.size()));
  for (double v : x)
    if (!std::isfinite(v)) throw InputError("non-finite coordinate");
}

double eval_kernel(const KernelSpec& k, std::span<const double> x, std::span<const double> y) {
  check_point(y, x.size());
  check_point(x, x.size());
  if (!(k.bandwidth > 0.0)) throw InputError("bandwidth must be positive");
  if (k.kind == KernelKind::Gaussian)
    return std::exp(-squared_distance(x, y) / (k.bandwidth * k.bandwidth));
  return kernel_at_distance(k, distance(x, y));
}

PointSet::PointSet(std::size_t n, std::size_t d, std::vector<double> coords, std::optional<double> R)
    : n_(n), d_(d), coords_(std::move(coords)) {
  if (n_ < 1 || d_ < 1) throw InputError("point set needs n >= 1 and d >= 1");
  if (coords_.size() != n_ * d_) throw InputError("coordinate count does not match n*d");
  for (double v : coords_)
    if (!std::isfinite(v)) throw InputError("non-finite coordinate in point set");
  if (R) {
    if (!(*R >= 0.0) || !std::isfinite(*R)) throw InputError("diameter bound must be finite and >= 0");
    R_ = *R;
  } else {
    R_ = centroid_bound(n_, d_, coords_);
  }
}

double PointSet::centroid_bound(std::size_t n, std::size_t d, const std::vector<double>& coords) {
  std::vector<double> c(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) c[j] += coords[i * d + j];
  for (double& v : c) v /= static_cast<double>(n);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    m = std::max(m, squared_distance({coords.data() + i * d, d}, c));
  // Slack of a few ulps keeps the bound valid under rounding.
  return 2.0 * std::sqrt(m) * (1.0 + 1e-12);
}

double PointSet::exact_diameter() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) m = std::max(m, squared_distance(row(i), row(j)));
  return std::sqrt(m);
}

void PointSet::validate_diameter() const {
  double diam = exact_diameter();
  if (diam > R_) throw InputError("diameter bound R is smaller than the exact diameter");
}

double PointSet::diameter_with(std::span<const double> x) const {
  check_point(x, d_);
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) m = std::max(m, distance(row(i), x));
  return std::max(R_, m);
}

double kde_exact(const PointSet& P, const KernelSpec& k, std::span<const double> x) {
  if (P.n() == 0) throw InputError("empty point set");
  check_point(x, P.d());
  if (!(k.bandwidth > 0.0)) throw InputError("bandwidth must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < P.n(); ++i) {
    double r2 = squared_distance(x, P.row(i));
    s += k.kind == KernelKind::Gaussian ? std::exp(-r2 / (k.bandwidth * k.bandwidth))
                                        : kernel_at_distance(k, std::sqrt(r2));
  }
  return s / static_cast<double>(P.n());
}

std::pair<PointSet, KernelSpec> normalize_bandwidth(const PointSet& P, const KernelSpec& k) {
  if (!(k.bandwidth > 0.0)) throw InputError("bandwidth must be positive");
  KernelSpec out = k;
  out.bandwidth = 1.0;
  if (k.bandwidth == 1.0) return {P, out};
  std::vector<double> c = P.coords();
  for (double& v : c) v /= k.bandwidth;
  return {PointSet(P.n(), P.d(), std::move(c), P.R() / k.bandwidth), out};
}

std::vector<double> normalize_query(const KernelSpec& k, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (k.bandwidth != 1.0)
    for (double& v : out) v /= k.bandwidth;
  return out;
}

} // namespace hbe
