#pragma once

#include "hbe/construction.hpp"
#include "hbe/random.hpp"
#include "hbe/sampler.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hbe {

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
  double slack = 0.0;  // rhs - lhs
};

// holds iff lhs <= rhs + 1e-9 max(1, |rhs|).
InequalityCheck make_check(double lhs, double rhs);

// Kahan-compensated sum.
class KahanSum {
public:
  void add(double v) {
    double y = v - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// sum |x_i|^{(2-b)/b} (i + sum_{j>i} |x_j|/|x_i|) <= n^b (sum |x_i|^{1/b})^{2-b};
// x sorted by |x| descending, b in [1/2, 1].
InequalityCheck check_monotone_holder(std::span<const double> x, double beta);

// sum_{i in S, j in S'} A_ij x_i x_j <= ||x||_{v,1} ||x||_{w,1} max_{S x S'} |A_ij|/(v_i w_j);
// A is n x n row-major.
InequalityCheck check_two_sided_holder(std::span<const double> A, std::span<const double> v,
                                       std::span<const double> w, std::span<const std::size_t> S,
                                       std::span<const std::size_t> S2, std::span<const double> x);

// first:  ||x||_b^b <= ||x||_1^b n^{1-b}, b in [0,1]
// second: ||x||_p^p <= ||x||_q^q ||x||_inf^{p-q}, p >= q > 0
std::pair<InequalityCheck, InequalityCheck> check_holder_corollary(std::span<const double> x, double beta,
                                                                   double p, double q);

struct Moments {
  std::size_t trials = 0;
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;           // unbiased
  double relative_variance = 0.0;  // variance / mean^2
  double relative_second_moment = 0.0;  // second_moment / mean^2
  double se_mean = 0.0;
  double se_second_moment = 0.0;
  double se_relative_variance = 0.0;
  double se_relative_second_moment = 0.0;
};

// Sample moments with jackknife standard errors; trials >= 2.
Moments empirical_moments(SampleSource& source, std::size_t trials);
Moments moments_of(std::span<const double> samples);

struct RateEstimate {
  double rate = 0.0;
  double se = 0.0;
};

// Fraction of sampled hash functions putting x and y in the same bucket.
RateEstimate empirical_collision_rate(const HashSpec& spec, std::span<const double> x, std::span<const double> y,
                                      std::size_t trials, Rng& rng);

struct SuiteRow {
  std::string check;
  std::size_t instances = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;  // smallest slack / max(1, |rhs|)
};

// Randomized inequality sweeps with a fixed seed.
std::vector<SuiteRow> run_verify_suite(std::uint64_t seed, std::size_t instances = 10000);
void write_suite_csv(std::ostream& out, const std::vector<SuiteRow>& rows);

} // namespace hbe
