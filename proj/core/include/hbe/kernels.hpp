#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hbe {

enum class KernelKind { Gaussian, Exponential, TStudent };

struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  int p = 2;               // t-Student exponent
  double bandwidth = 1.0;  // sigma
};

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

// Unit-bandwidth kernel value at distance r >= 0.
double unit_kernel(KernelKind kind, int p, double r);

// Kernel value at distance r, bandwidth applied.
double kernel_at_distance(const KernelSpec& k, double r);

double squared_distance(std::span<const double> x, std::span<const double> y);
double distance(std::span<const double> x, std::span<const double> y);

double eval_kernel(const KernelSpec& k, std::span<const double> x, std::span<const double> y);

// n x d row-major point set with a diameter bound R.
class PointSet {
public:
  PointSet() = default;
  // R defaults to 2 * (max distance to the centroid).
  PointSet(std::size_t n, std::size_t d, std::vector<double> coords,
           std::optional<double> R = std::nullopt);

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  double R() const { return R_; }
  const std::vector<double>& coords() const { return coords_; }
  std::span<const double> row(std::size_t i) const { return {coords_.data() + i * d_, d_}; }

  // Brute-force maximum pairwise distance.
  double exact_diameter() const;
  // Throws InputError if R is smaller than the exact diameter.
  void validate_diameter() const;
  // Diameter bound of P together with an extra point.
  double diameter_with(std::span<const double> x) const;

  static double centroid_bound(std::size_t n, std::size_t d, const std::vector<double>& coords);

private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> coords_;
  double R_ = 0.0;
};

double kde_exact(const PointSet& P, const KernelSpec& k, std::span<const double> x);

// Divides coordinates by sigma so that the kernel becomes unit bandwidth.
std::pair<PointSet, KernelSpec> normalize_bandwidth(const PointSet& P, const KernelSpec& k);
std::vector<double> normalize_query(const KernelSpec& k, std::span<const double> x);

} // namespace hbe
