#include <hbe/baselines.hpp>
#include <hbe/construction.hpp>
#include <hbe/estimation.hpp>
#include <hbe/index.hpp>
#include <hbe/kernels.hpp>
#include <hbe/kmvm.hpp>
#include <hbe/random.hpp>

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <random>

using namespace hbe;

namespace {

// Fixed-seed Gaussian cloud scaled to diameter about `diam`.
std::shared_ptr<const PointSet> cloud(std::size_t n, std::size_t d, double diam, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, diam / (4.0 * std::sqrt(double(d))));
  std::vector<double> c(n * d);
  for (auto& v : c) v = g(rng);
  return std::make_shared<const PointSet>(n, d, std::move(c));
}

const char* method_name(int m) {
  static const char* names[] = {"hbe-exp", "hbe-student", "hbe-gauss-euclid", "hbe-gauss-ball"};
  return names[m];
}

void BM_HashBucket(benchmark::State& state) {
  auto P = cloud(1000, 20, 2.0, 1);
  auto c = make_construction(method_name(int(state.range(0))), P->R(), P->n(), {});
  auto h = HashFunction::sample(c.spec, P->d(), 7);
  HashWorkspace ws;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h.bucket(P->row(i), ws));
    i = (i + 1) % P->n();
  }
  state.SetLabel(method_name(int(state.range(0))));
}
BENCHMARK(BM_HashBucket)->DenseRange(0, 3);

void BM_IndexBuild(benchmark::State& state) {
  auto P = cloud(std::size_t(state.range(0)), 20, 2.0, 2);
  auto c = make_construction("hbe-exp", P->R(), P->n(), {});
  for (auto _ : state) benchmark::DoNotOptimize(HbeIndex::build(P, c, 64, 3).num_tables());
  state.SetItemsProcessed(state.iterations() * 64 * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_IndexSample(benchmark::State& state) {
  auto P = cloud(10000, 20, 2.0, 4);
  auto c = make_construction("hbe-exp", P->R(), P->n(), {});
  auto index = HbeIndex::build(P, c, 256, 5);
  Rng rng(6);
  HashWorkspace ws;
  std::size_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.sample(t, P->row(t % P->n()), rng, ws));
    t = (t + 1) % index.num_tables();
  }
}
BENCHMARK(BM_IndexSample);

void BM_RandomSamplingDraw(benchmark::State& state) {
  auto P = cloud(10000, 20, 2.0, 7);
  RandomSamplingSource src(P, KernelSpec{KernelKind::Exponential, 2, 1.0}, P->row(0), 8);
  for (auto _ : state) benchmark::DoNotOptimize(src.draw());
}
BENCHMARK(BM_RandomSamplingDraw);

void BM_RffDraw(benchmark::State& state) {
  auto P = cloud(std::size_t(state.range(0)), 20, 2.0, 9);
  RffSource src(P, KernelSpec{KernelKind::Gaussian, 2, 1.0}, P->row(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(src.draw());
}
BENCHMARK(BM_RffDraw)->Arg(100)->Arg(1000);

void BM_QueryKdeRandomSampling(benchmark::State& state) {
  auto P = cloud(10000, 20, 2.0, 11);
  KernelSpec k{KernelKind::Exponential, 2, 1.0};
  std::uint64_t seed = 12;
  for (auto _ : state) {
    RandomSamplingSource src(P, k, P->row(seed % P->n()), seed);
    benchmark::DoNotOptimize(query_kde(src, rs_variance, 0.2, 1e-2, 0.1).value);
    ++seed;
  }
}
BENCHMARK(BM_QueryKdeRandomSampling)->Unit(benchmark::kMicrosecond);

void BM_KdeExact(benchmark::State& state) {
  auto P = cloud(std::size_t(state.range(0)), 20, 2.0, 13);
  KernelSpec k{KernelKind::Gaussian, 2, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(kde_exact(*P, k, P->row(0)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdeExact)->Arg(1000)->Arg(100000);

void BM_KmvmRandomSampling(benchmark::State& state) {
  auto P = cloud(std::size_t(state.range(0)), 10, 2.0, 14);
  KernelSpec k{KernelKind::Exponential, 2, 1.0};
  std::vector<double> z(P->n());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = 1.0 / double(1 + i % 17);
  double total = std::accumulate(z.begin(), z.end(), 0.0);
  for (double& v : z) v /= total;
  KmvmOptions opt;
  opt.method = ClassMethod::RandomSampling;
  opt.seed = 15;
  for (auto _ : state) benchmark::DoNotOptimize(kmvm(P, k, z, 0.5, 0.05, 0.1, opt).y.data());
}
BENCHMARK(BM_KmvmRandomSampling)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MatvecExact(benchmark::State& state) {
  auto P = cloud(std::size_t(state.range(0)), 10, 2.0, 16);
  KernelSpec k{KernelKind::Exponential, 2, 1.0};
  std::vector<double> z(P->n(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_matvec(*P, k, z).data());
}
BENCHMARK(BM_MatvecExact)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
