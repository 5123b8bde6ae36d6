#pragma once

#include "hbe/construction.hpp"
#include "hbe/kernels.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hbe {

struct WeightClass {
  std::vector<std::uint32_t> members;
  double mass = 0.0;  // Z_l
};

// classes[0] holds z_i < tau'/n; classes[l], l >= 1, holds z_i in [2^-l, 2^-l+1)
// (class 1 also takes z_i = 1).
struct WeightPartition {
  std::vector<WeightClass> classes;
  int L = 0;
  double tau_prime = 0.0;
};

// z nonnegative with sum 1 (within 1e-9); tau' = eps tau, L = ceil(log2(n / tau')).
WeightPartition partition_by_weight(std::span<const double> z, double eps, double tau);

enum class ClassMethod { Hbe, RandomSampling };

struct KmvmOptions {
  ClassMethod method = ClassMethod::Hbe;
  std::string hbe_method;  // empty: chosen from the kernel
  ConstructionParams params;
  std::size_t crossover = 64;  // smaller classes are summed exactly
  double C_N = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct KmvmClassReport {
  int level = 0;
  std::size_t size = 0;
  double mass = 0.0;
  bool kept = false;
  bool brute_force = false;
  std::uint64_t tables = 0;
  std::uint64_t samples = 0;
};

struct KmvmResult {
  std::vector<double> y;
  std::vector<KmvmClassReport> classes;
  double tau_prime = 0.0;
};

// Default HBE method for a kernel kind.
std::string default_hbe_method(KernelKind kind);

// y_i ~ sum_j k(x_i, x_j) z_j for every point x_i of P.
KmvmResult kmvm(std::shared_ptr<const PointSet> P, const KernelSpec& kernel, std::span<const double> z,
                double eps, double tau, double chi_total, const KmvmOptions& options);

// Arbitrary real z: positive and negative parts normalized, run with the same seed, recombined.
std::vector<double> kmvm_signed(std::shared_ptr<const PointSet> P, const KernelSpec& kernel,
                                std::span<const double> z, double eps, double tau, double chi_total,
                                const KmvmOptions& options);

// Dense y = K z.
std::vector<double> kernel_matvec(const PointSet& P, const KernelSpec& kernel, std::span<const double> z);

} // namespace hbe
