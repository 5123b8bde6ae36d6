#include "hbe/diagnostics.hpp"

#include "hbe/error.hpp"
#include "hbe/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace hbe {

InequalityCheck make_check(double lhs, double rhs) {
  InequalityCheck c;
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.holds = lhs <= rhs + 1e-9 * std::max(1.0, std::fabs(rhs));
  return c;
}

InequalityCheck check_monotone_holder(std::span<const double> x, double beta) {
  if (!(beta >= 0.5 && beta <= 1.0)) throw InputError("monotone Holder needs beta in [1/2, 1]");
  const std::size_t n = x.size();
  if (n == 0) throw InputError("monotone Holder needs a nonempty vector");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) throw InputError("monotone Holder needs finite entries");
    if (i > 0 && std::fabs(x[i]) > std::fabs(x[i - 1]))
      throw InputError("monotone Holder needs x sorted by |x| descending");
  }
  const double e = (2.0 - beta) / beta;
  // suffix[i] = sum_{j > i} |x_j|
  std::vector<double> suffix(n, 0.0);
  KahanSum acc;
  for (std::size_t i = n; i-- > 0;) {
    suffix[i] = acc.value();
    acc.add(std::fabs(x[i]));
  }
  KahanSum lhs, norm;
  for (std::size_t i = 0; i < n; ++i) {
    double a = std::fabs(x[i]);
    double idx = static_cast<double>(i + 1);
    if (a > 0.0) lhs.add(std::pow(a, e) * idx + std::pow(a, e - 1.0) * suffix[i]);
    norm.add(std::pow(a, 1.0 / beta));
  }
  double rhs = std::pow(static_cast<double>(n), beta) * std::pow(norm.value(), 2.0 - beta);
  return make_check(lhs.value(), rhs);
}

InequalityCheck check_two_sided_holder(std::span<const double> A, std::span<const double> v,
                                       std::span<const double> w, std::span<const std::size_t> S,
                                       std::span<const std::size_t> S2, std::span<const double> x) {
  const std::size_t n = x.size();
  if (v.size() != n || w.size() != n || A.size() != n * n)
    throw InputError("two-sided Holder: A must be n x n and v, w, x of length n");
  for (std::size_t i = 0; i < n; ++i)
    if (!(v[i] > 0.0) || !(w[i] > 0.0)) throw InputError("two-sided Holder needs strictly positive v and w");
  for (auto i : S)
    if (i >= n) throw InputError("index set out of range");
  for (auto j : S2)
    if (j >= n) throw InputError("index set out of range");
  KahanSum lhs, nv, nw;
  double ratio = 0.0;
  for (auto i : S)
    for (auto j : S2) {
      double a = A[i * n + j];
      lhs.add(a * x[i] * x[j]);
      ratio = std::max(ratio, std::fabs(a) / (v[i] * w[j]));
    }
  for (std::size_t i = 0; i < n; ++i) {
    nv.add(v[i] * std::fabs(x[i]));
    nw.add(w[i] * std::fabs(x[i]));
  }
  return make_check(lhs.value(), nv.value() * nw.value() * ratio);
}

std::pair<InequalityCheck, InequalityCheck> check_holder_corollary(std::span<const double> x, double beta,
                                                                   double p, double q) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InputError("Holder corollary needs beta in [0, 1]");
  if (!(q > 0.0) || !(p >= q)) throw InputError("Holder corollary needs p >= q > 0");
  const std::size_t n = x.size();
  if (n == 0) throw InputError("Holder corollary needs a nonempty vector");
  KahanSum sb, s1, sp, sq;
  double inf = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("Holder corollary needs finite entries");
    double a = std::fabs(v);
    sb.add(std::pow(a, beta));
    s1.add(a);
    sp.add(std::pow(a, p));
    sq.add(std::pow(a, q));
    inf = std::max(inf, a);
  }
  auto first = make_check(sb.value(), std::pow(s1.value(), beta) * std::pow(static_cast<double>(n), 1.0 - beta));
  auto second = make_check(sp.value(), sq.value() * std::pow(inf, p - q));
  return {first, second};
}

Moments moments_of(std::span<const double> z) {
  const std::size_t n = z.size();
  if (n < 2) throw InputError("moments need at least 2 samples");
  const double nd = static_cast<double>(n);
  KahanSum s1, s2;
  for (double v : z) {
    s1.add(v);
    s2.add(v * v);
  }
  Moments m;
  m.trials = n;
  m.mean = s1.value() / nd;
  m.second_moment = s2.value() / nd;
  KahanSum m2;
  for (double v : z) m2.add((v - m.mean) * (v - m.mean));
  const double M2 = m2.value();
  m.variance = M2 / (nd - 1.0);
  m.relative_variance = m.variance / (m.mean * m.mean);
  m.relative_second_moment = m.second_moment / (m.mean * m.mean);

  // Jackknife: leave-one-out replicates in closed form.
  std::vector<double> mean_i(n), second_i(n), rv_i(n), rs_i(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = z[i] - m.mean;
    mean_i[i] = m.mean - d / (nd - 1.0);
    second_i[i] = (s2.value() - z[i] * z[i]) / (nd - 1.0);
    double mi2 = mean_i[i] * mean_i[i];
    rs_i[i] = second_i[i] / mi2;
    if (n >= 3) {
      double var_i = std::max(0.0, M2 - d * d * nd / (nd - 1.0)) / (nd - 2.0);
      rv_i[i] = var_i / mi2;
    }
  }
  auto jack = [&](const std::vector<double>& rep) {
    KahanSum s;
    for (double r : rep) s.add(r);
    double avg = s.value() / nd;
    KahanSum dev;
    for (double r : rep) dev.add((r - avg) * (r - avg));
    return std::sqrt((nd - 1.0) / nd * dev.value());
  };
  m.se_mean = jack(mean_i);
  m.se_second_moment = jack(second_i);
  m.se_relative_second_moment = jack(rs_i);
  m.se_relative_variance = n >= 3 ? jack(rv_i) : std::numeric_limits<double>::quiet_NaN();
  return m;
}

Moments empirical_moments(SampleSource& source, std::size_t trials) {
  if (trials < 2) throw InputError("empirical moments need trials >= 2");
  std::vector<double> z(trials);
  for (auto& v : z) v = source.draw();
  return moments_of(z);
}

RateEstimate empirical_collision_rate(const HashSpec& spec, std::span<const double> x, std::span<const double> y,
                                      std::size_t trials, Rng& rng) {
  if (trials < 1) throw InputError("collision rate needs trials >= 1");
  if (x.size() != y.size()) throw InputError("dimension mismatch in collision rate");
  HashWorkspace ws;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    HashFunction h = HashFunction::sample(spec, x.size(), rng());
    if (h.bucket(x, ws) == h.bucket(y, ws)) ++hits;
  }
  RateEstimate r;
  double t = static_cast<double>(trials);
  r.rate = static_cast<double>(hits) / t;
  r.se = std::sqrt(r.rate * (1.0 - r.rate) / t);
  return r;
}

namespace {

struct RowAccumulator {
  SuiteRow row;
  bool any = false;
  void add(const InequalityCheck& c) {
    ++row.instances;
    if (!c.holds) ++row.violations;
    double rel = c.slack / std::max(1.0, std::fabs(c.rhs));
    row.worst_slack = any ? std::min(row.worst_slack, rel) : rel;
    any = true;
  }
};

// Entries with magnitudes spread over several orders, optionally with ties and zeros.
std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::normal_distribution<double> logmag(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) {
    double r = u(rng);
    if (r < 0.05) v = 0.0;
    else v = std::exp(logmag(rng)) * (u(rng) < 0.5 ? -1.0 : 1.0);
  }
  if (n > 1 && u(rng) < 0.2) x[1] = x[0];
  return x;
}

} // namespace

std::vector<SuiteRow> run_verify_suite(std::uint64_t seed, std::size_t instances) {
  Rng rng(derive_seed(seed, Stream::Verify, 0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(1, 50);

  RowAccumulator mono, mono_eq, two, cor1, cor2, eucl, series;
  mono.row.check = "monotone_holder";
  mono_eq.row.check = "monotone_holder_equality";
  two.row.check = "two_sided_holder";
  cor1.row.check = "holder_corollary_beta";
  cor2.row.check = "holder_corollary_pq";
  eucl.row.check = "euclidean_pointwise_bounds";
  series.row.check = "euclidean_series";

  for (std::size_t k = 0; k < instances; ++k) {
    std::size_t n = dim(rng);
    double beta = 0.5 + 0.5 * u(rng);
    auto x = random_vector(rng, n);
    std::sort(x.begin(), x.end(), [](double a, double b) { return std::fabs(a) > std::fabs(b); });
    mono.add(check_monotone_holder(x, beta));

    std::vector<double> c(n, std::exp(4.0 * (u(rng) - 0.5)));
    auto eq = check_monotone_holder(c, beta);
    double target = static_cast<double>(n) * static_cast<double>(n) * std::pow(c[0], (2.0 - beta) / beta);
    mono_eq.add(eq);
    // Equality case: both sides equal n^2 c^{(2-b)/b} to within the tolerance.
    mono_eq.add(make_check(std::fabs(eq.lhs - target), 1e-9 * std::max(1.0, target)));
    mono_eq.row.instances -= 1;

    std::size_t m = std::min<std::size_t>(n, 20);
    std::vector<double> A(m * m), v(m), w(m), y(m);
    for (auto& a : A) a = 4.0 * (u(rng) - 0.5);
    for (auto& e : v) e = 0.01 + u(rng);
    for (auto& e : w) e = 0.01 + u(rng);
    for (auto& e : y) e = 2.0 * (u(rng) - 0.5);
    std::vector<std::size_t> S, S2;
    for (std::size_t i = 0; i < m; ++i) {
      if (u(rng) < 0.5) S.push_back(i);
      if (u(rng) < 0.5) S2.push_back(i);
    }
    two.add(check_two_sided_holder(A, v, w, S, S2, y));

    auto z = random_vector(rng, n);
    double q = 0.1 + 3.0 * u(rng);
    double p = q + 3.0 * u(rng);
    auto [first, second] = check_holder_corollary(z, u(rng), p, q);
    cor1.add(first);
    cor2.add(second);

    double delta = 0.01 + 0.49 * u(rng);
    double cmax = std::min(delta, 1.0 / std::sqrt(2.0 * std::log(1.0 / delta)));
    double cc = cmax * (0.001 + 0.999 * u(rng));
    auto bd = collision_prob_euclidean_bounds(cc, delta);
    double exact = collision_prob_euclidean(cc);
    eucl.add(make_check(bd.lower, exact));
    eucl.add(make_check(exact, bd.upper));
    eucl.row.instances -= 1;
  }
  for (double cc : {2.0, 3.0, 5.0}) {
    double diff = std::fabs(collision_prob_euclidean_series(cc, 8) - collision_prob_euclidean(cc));
    series.add(make_check(diff, 1e-8));
  }
  return {mono.row, mono_eq.row, two.row, cor1.row, cor2.row, eucl.row, series.row};
}

void write_suite_csv(std::ostream& out, const std::vector<SuiteRow>& rows) {
  out << "check,instances,violations,worst_slack\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.worst_slack);
    out << r.check << ',' << r.instances << ',' << r.violations << ',' << buf << '\n';
  }
}

} // namespace hbe
