#include "hbe/kmvm.hpp"

#include "hbe/baselines.hpp"
#include "hbe/error.hpp"
#include "hbe/estimation.hpp"
#include "hbe/index.hpp"
#include "hbe/random.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

namespace hbe {

namespace {

void check_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw InputError(std::string(name) + " must lie in (0,1)");
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

} // namespace

WeightPartition partition_by_weight(std::span<const double> z, double eps, double tau) {
  check_open_unit(eps, "KMVM accuracy eps");
  check_open_unit(tau, "KMVM threshold tau");
  const std::size_t n = z.size();
  if (n == 0) throw InputError("KMVM needs a nonempty weight vector");
  double total = 0.0;
  for (double v : z) {
    if (!std::isfinite(v)) throw InputError("KMVM weights must be finite");
    if (v < 0.0) throw InputError("KMVM weights must be nonnegative; use kmvm_signed for signed vectors");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw InputError("KMVM weights must sum to 1 (normalize first)");
  WeightPartition part;
  part.tau_prime = eps * tau;
  part.L = static_cast<int>(std::ceil(std::log2(static_cast<double>(n) / part.tau_prime)));
  part.classes.resize(static_cast<std::size_t>(part.L) + 1);
  const double floor_weight = part.tau_prime / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = z[i];
    int level = 0;
    if (v >= floor_weight && v > 0.0) {
      int e = 0;
      std::frexp(v, &e);  // v in [2^(e-1), 2^e)
      level = std::clamp(1 - e, 1, part.L);
    }
    auto& c = part.classes[static_cast<std::size_t>(level)];
    c.members.push_back(static_cast<std::uint32_t>(i));
    c.mass += v;
  }
  return part;
}

std::string default_hbe_method(KernelKind kind) {
  switch (kind) {
    case KernelKind::Exponential: return "hbe-exp";
    case KernelKind::TStudent: return "hbe-student";
    case KernelKind::Gaussian: return "hbe-gauss-euclid";
  }
  throw InputError("unknown kernel kind");
}

std::vector<double> kernel_matvec(const PointSet& P, const KernelSpec& kernel, std::span<const double> z) {
  if (z.size() != P.n()) throw InputError("vector length does not match the point count");
  std::vector<double> y(P.n(), 0.0);
  for (std::size_t i = 0; i < P.n(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < P.n(); ++j)
      if (z[j] != 0.0) s += z[j] * kernel_at_distance(kernel, distance(P.row(i), P.row(j)));
    y[i] = s;
  }
  return y;
}

KmvmResult kmvm(std::shared_ptr<const PointSet> P0, const KernelSpec& kernel0, std::span<const double> z,
                double eps, double tau, double chi_total, const KmvmOptions& options) {
  if (!P0) throw InputError("KMVM needs a point set");
  if (z.size() != P0->n()) throw InputError("vector length does not match the point count");
  check_open_unit(chi_total, "KMVM failure probability chi");
  WeightPartition part = partition_by_weight(z, eps, tau);
  auto [Pn, kernel] = normalize_bandwidth(*P0, kernel0);
  auto P = std::make_shared<const PointSet>(std::move(Pn));
  const std::size_t n = P->n(), d = P->d();
  const double tau_p = part.tau_prime;
  const double L = static_cast<double>(part.L);
  const double chi_q = chi_total / (static_cast<double>(n) * L);

  KmvmResult out;
  out.y.assign(n, 0.0);
  out.tau_prime = tau_p;
  for (std::size_t level = 0; level < part.classes.size(); ++level) {
    const WeightClass& cls = part.classes[level];
    if (cls.members.empty()) continue;
    KmvmClassReport rep;
    rep.level = static_cast<int>(level);
    rep.size = cls.members.size();
    rep.mass = cls.mass;
    rep.kept = level >= 1 && cls.mass >= tau_p / L;
    if (!rep.kept) {
      out.classes.push_back(rep);
      continue;
    }
    const std::uint64_t class_seed = derive_seed(options.seed, Stream::Kmvm, level);
    const std::size_t m = cls.members.size();
    if (m < options.crossover) {
      rep.brute_force = true;
      parallel_for(n, options.threads, [&](std::size_t i) {
        double s = 0.0;
        for (auto j : cls.members) s += z[j] * unit_kernel(kernel.kind, kernel.p, distance(P->row(i), P->row(j)));
        out.y[i] += s;
      });
      out.classes.push_back(rep);
      continue;
    }
    std::vector<double> coords;
    coords.reserve(m * d);
    std::vector<double> factors(m);
    for (std::size_t k = 0; k < m; ++k) {
      auto row = P->row(cls.members[k]);
      coords.insert(coords.end(), row.begin(), row.end());
      factors[k] = z[cls.members[k]] * static_cast<double>(m) / cls.mass;
    }
    auto S = std::make_shared<const PointSet>(m, d, std::move(coords), P->R());
    std::vector<double> est(n, 0.0);
    std::vector<std::uint64_t> used(n, 0);
    auto run = [&](auto&& query_one) {
      parallel_for(n, options.threads, [&](std::size_t i) {
        try {
          EstimateReport r = query_one(i);
          est[i] = r.value;
          used[i] = r.samples_used;
        } catch (const ResourceError& e) {
          throw ResourceError("KMVM class " + std::to_string(level) + ", query " + std::to_string(i) + ": " +
                                  e.what(),
                              e.samples_used);
        }
      });
    };
    if (options.method == ClassMethod::RandomSampling) {
      VarianceFn V = [](double mu) { return 4.0 * rs_variance(mu); };
      run([&](std::size_t i) {
        RandomSamplingSource src(S, kernel, P->row(i), derive_seed(class_seed, 1, i), factors);
        return query_kde(src, V, eps, tau_p, chi_q);
      });
    } else {
      std::string method = options.hbe_method.empty() ? default_hbe_method(kernel.kind) : options.hbe_method;
      HbeConstruction c = make_construction(method, P->R(), m, options.params);
      if (c.kernel.kind != kernel.kind || (kernel.kind == KernelKind::TStudent && c.kernel.p != kernel.p))
        throw ConfigError("HBE method '" + method + "' does not match kernel " + to_string(kernel.kind));
      c.variance.factor *= 4.0;
      VarianceFn V = c.variance;
      rep.tables = required_tables(V, eps, tau_p, chi_q, options.C_N);
      HbeIndex index = HbeIndex::build(S, c, rep.tables, derive_seed(class_seed, 0, 0), factors, options.threads);
      run([&](std::size_t i) {
        return query_kde(index, P->row(i), eps, tau_p, chi_q, derive_seed(class_seed, 1, i));
      });
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.y[i] += cls.mass * est[i];
      rep.samples += used[i];
    }
    out.classes.push_back(rep);
  }
  return out;
}

std::vector<double> kmvm_signed(std::shared_ptr<const PointSet> P, const KernelSpec& kernel,
                                std::span<const double> z, double eps, double tau, double chi_total,
                                const KmvmOptions& options) {
  if (!P) throw InputError("KMVM needs a point set");
  if (z.size() != P->n()) throw InputError("vector length does not match the point count");
  std::vector<double> pos(z.size(), 0.0), neg(z.size(), 0.0);
  double sp = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) throw InputError("KMVM weights must be finite");
    if (z[i] > 0.0) {
      pos[i] = z[i];
      sp += z[i];
    } else if (z[i] < 0.0) {
      neg[i] = -z[i];
      sn -= z[i];
    }
  }
  auto part = [&](std::vector<double>& v, double s) {
    std::vector<double> out(v.size(), 0.0);
    if (s == 0.0) return out;
    for (double& e : v) e /= s;
    // Renormalize so that rounding never breaks the unit-sum check.
    double t = 0.0;
    for (double e : v) t += e;
    for (double& e : v) e /= t;
    KmvmResult r = kmvm(P, kernel, v, eps, tau, chi_total, options);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * r.y[i];
    return out;
  };
  std::vector<double> yp = part(pos, sp), yn = part(neg, sn);
  std::vector<double> y(z.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = yp[i] - yn[i];
  return y;
}

} // namespace hbe
