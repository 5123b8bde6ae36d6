#include "hbe/estimation.hpp"

#include "hbe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hbe {

namespace {

// ceil that does not round 48.000000000001 up to 49.
double guarded_ceil(double x) {
  double r = std::nearbyint(x);
  if (std::fabs(x - r) <= 1e-9 * std::max(1.0, std::fabs(x))) return r;
  return std::ceil(x);
}

std::uint64_t to_count(double x, const char* what) {
  if (!std::isfinite(x) || x > 9.0e18) throw InputError(std::string(what) + " is too large to represent");
  return static_cast<std::uint64_t>(std::max(1.0, x));
}

void check_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw InputError(std::string(name) + " must lie in (0,1)");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t L = v.size();
  if (L % 2 == 1) return v[L / 2];
  return 0.5 * (v[L / 2 - 1] + v[L / 2]);
}

} // namespace

MomPlan mom_plan(double eps, double V, double delta) {
  if (!(eps > 0.0)) throw InputError("MoM accuracy eps must be positive");
  check_open_unit(delta, "MoM failure probability delta");
  if (!(V >= 0.0) || !std::isfinite(V)) throw InputError("MoM variance bound V must be finite and >= 0");
  MomPlan plan;
  plan.m = to_count(guarded_ceil(6.0 * V / (eps * eps)), "MoM block size");
  plan.L = to_count(guarded_ceil(9.0 * std::log(1.0 / delta)), "MoM block count");
  if (plan.m > std::numeric_limits<std::uint64_t>::max() / plan.L)
    throw InputError("MoM sample count overflows");
  return plan;
}

double median_of_means(EstimatorHandle& handle, double V, double eps, double delta) {
  check_open_unit(eps, "MoM accuracy eps");
  MomPlan plan = mom_plan(eps, V, delta);
  std::vector<double> means(plan.L);
  for (auto& mean : means) mean = handle.draw_mean(plan.m);
  return median(std::move(means));
}

AmrPlan amr_plan(double alpha, double tau, double chi) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("AMR alpha must lie in (0,1]");
  check_open_unit(tau, "AMR threshold tau");
  check_open_unit(chi, "AMR failure probability chi");
  AmrPlan p;
  p.eps = 2.0 * alpha / 7.0;
  p.c = p.eps / 2.0;
  p.gamma = p.eps / 7.0;
  double log_inv_tau = std::log(1.0 / tau);
  p.delta = 2.0 * alpha * chi / (49.0 * log_inv_tau);
  p.L = to_count(guarded_ceil(9.0 * std::log(1.0 / p.delta)), "AMR block count");
  // Run through the first level with mu_i <= tau so that the acceptance window of mu = tau is reached.
  p.loop_cutoff = std::ceil(std::log(tau) / std::log(1.0 - p.gamma));
  p.output_cutoff = 49.0 * log_inv_tau / (2.0 * alpha);
  return p;
}

EstimateReport amr(EstimatorHandle& handle, double alpha, double tau, double chi) {
  const AmrPlan plan = amr_plan(alpha, tau, chi);
  const std::uint64_t start = handle.samples_used();
  std::vector<double> block_means(plan.L, 0.0);
  std::uint64_t count = 0;
  EstimateReport rep;
  for (std::uint64_t i = 0;; ++i) {
    if (static_cast<double>(i) > plan.loop_cutoff) {
      rep.below_threshold = true;
      rep.value = 0.0;
      break;
    }
    double mu_i = std::pow(1.0 - plan.gamma, static_cast<double>(i));
    rep.relaxation_steps = i;
    rep.mu_final = mu_i;
    std::uint64_t m = mom_plan(plan.eps / 3.0, handle.V(mu_i), plan.delta).m;
    if (m > count) {
      // Running-mean update; exact when every chunk has the same mean.
      const double weight = static_cast<double>(m - count) / static_cast<double>(m);
      for (auto& bm : block_means) {
        double chunk = handle.draw_mean(m - count);
        bm = count == 0 ? chunk : bm + (chunk - bm) * weight;
      }
      count = m;
    }
    double Z = median(block_means);
    if (std::fabs(Z - mu_i) <= plan.c * mu_i) {
      if (static_cast<double>(i) <= plan.output_cutoff) {
        rep.value = Z;
        rep.below_threshold = false;
      } else {
        rep.value = 0.0;
        rep.below_threshold = true;
      }
      break;
    }
  }
  rep.samples_used = handle.samples_used() - start;
  return rep;
}

EstimateReport query_kde(SampleSource& source, const VarianceFn& V, double eps, double tau, double chi) {
  check_open_unit(eps, "query accuracy eps");
  check_open_unit(tau, "query threshold tau");
  check_open_unit(chi, "query failure probability chi");
  EstimatorHandle handle(source, V);
  EstimateReport rep = amr(handle, 1.0, tau, chi / 2.0);
  if (rep.value == 0.0) {
    rep.below_threshold = true;
    rep.samples_used = handle.samples_used();
    return rep;
  }
  double mu_tilde = rep.value;
  rep.value = median_of_means(handle, V(mu_tilde / 2.0), eps, chi / 2.0);
  rep.below_threshold = false;
  rep.samples_used = handle.samples_used();
  return rep;
}

EstimateReport query_kde(const HbeIndex& index, std::span<const double> x, double eps, double tau,
                         double chi, std::uint64_t seed) {
  HbeSession session(index, x, seed);
  return query_kde(session, [&index](double mu) { return index.V(mu); }, eps, tau, chi);
}

std::uint64_t query_sample_bound(const VarianceFn& V, double eps, double tau, double chi) {
  check_open_unit(eps, "query accuracy eps");
  const AmrPlan plan = amr_plan(1.0, tau, chi / 2.0);
  double last = std::floor(plan.loop_cutoff);
  double mu_last = std::pow(1.0 - plan.gamma, last);
  MomPlan p1 = mom_plan(plan.eps / 3.0, V(mu_last), plan.delta);
  p1.L = plan.L;
  MomPlan p2 = mom_plan(eps, V((1.0 - plan.c) * mu_last / 2.0), chi / 2.0);
  return p1.total() + p2.total();
}

std::uint64_t table_count_formula(const VarianceFn& V, double eps, double tau, double chi, double C_N) {
  check_open_unit(eps, "query accuracy eps");
  check_open_unit(tau, "query threshold tau");
  check_open_unit(chi, "query failure probability chi");
  if (!(C_N > 0.0)) throw InputError("table constant C_N must be positive");
  double e3 = eps / 3.0;
  double base = guarded_ceil(std::log(2.0 / chi) * 54.0 / (e3 * e3) * V(tau));
  return to_count(std::ceil(C_N * base), "table count");
}

std::uint64_t required_tables(const VarianceFn& V, double eps, double tau, double chi, double C_N) {
  return std::max(table_count_formula(V, eps, tau, chi, C_N), query_sample_bound(V, eps, tau, chi));
}

} // namespace hbe
