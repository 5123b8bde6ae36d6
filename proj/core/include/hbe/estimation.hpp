#pragma once

#include "hbe/index.hpp"
#include "hbe/sampler.hpp"

#include <cstdint>
#include <span>

namespace hbe {

// m = ceil(6 V / eps^2), L = ceil(9 ln(1/delta)).
struct MomPlan {
  std::uint64_t m = 0;
  std::uint64_t L = 0;
  std::uint64_t total() const { return m * L; }
};
MomPlan mom_plan(double eps, double V, double delta);

// Median of L means of m samples each (mean of the middle two when L is even).
double median_of_means(EstimatorHandle& handle, double V, double eps, double delta);

struct EstimateReport {
  double value = 0.0;
  bool below_threshold = false;
  std::uint64_t samples_used = 0;
  std::uint64_t relaxation_steps = 0;
  double mu_final = 1.0;
};

// Parameters derived from (alpha, tau, chi).
struct AmrPlan {
  double eps = 0.0;
  double c = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  std::uint64_t L = 0;
  double loop_cutoff = 0.0;    // first i with mu_i <= tau; stop once i exceeds this
  double output_cutoff = 0.0;  // accepted levels beyond this return 0
};
AmrPlan amr_plan(double alpha, double tau, double chi);

// Adaptive mean relaxation with shared running sums across levels.
EstimateReport amr(EstimatorHandle& handle, double alpha, double tau, double chi);

// Two-phase KDE query: AMR at alpha = 1 (failure chi/2), then MoM at (eps, chi/2) with V(mu~/2).
EstimateReport query_kde(SampleSource& source, const VarianceFn& V, double eps, double tau, double chi);
EstimateReport query_kde(const HbeIndex& index, std::span<const double> x, double eps, double tau,
                         double chi, std::uint64_t seed);

// Largest number of samples one query_kde call can consume.
std::uint64_t query_sample_bound(const VarianceFn& V, double eps, double tau, double chi);

// ceil(C_N * ceil(ln(2/chi) * 54/(eps/3)^2 * V(tau))).
std::uint64_t table_count_formula(const VarianceFn& V, double eps, double tau, double chi, double C_N = 1.0);

// Tables to build: the formula above, raised to query_sample_bound when that is larger.
std::uint64_t required_tables(const VarianceFn& V, double eps, double tau, double chi, double C_N = 1.0);

} // namespace hbe
