#include "hbe/index.hpp"

#include "hbe/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace hbe {

namespace {

struct TableData {
  std::vector<std::uint64_t> fp;
  std::vector<std::uint32_t> start;
};

TableData build_table(const PointSet& P, const HashFunction& h, std::uint32_t* ids) {
  const std::size_t n = P.n();
  HashWorkspace ws;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) keyed[i] = {h.bucket(P.row(i), ws), static_cast<std::uint32_t>(i)};
  std::sort(keyed.begin(), keyed.end());
  TableData td;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || keyed[i].first != keyed[i - 1].first) {
      td.fp.push_back(keyed[i].first);
      td.start.push_back(static_cast<std::uint32_t>(i));
    }
    ids[i] = keyed[i].second;
  }
  return td;
}

} // namespace

void HbeIndex::regenerate_hashes() {
  const std::size_t N = table_begin_.size() - 1;
  hashes_.clear();
  hashes_.reserve(N);
  for (std::size_t t = 0; t < N; ++t)
    hashes_.push_back(HashFunction::sample(construction_.spec, points_->d(),
                                           derive_seed(master_seed_, Stream::Table, t)));
}

HbeIndex HbeIndex::build(std::shared_ptr<const PointSet> points, const HbeConstruction& construction,
                         std::size_t N, std::uint64_t master_seed, std::vector<double> factors,
                         unsigned threads) {
  if (!points) throw InputError("index needs a point set");
  if (N < 1) throw InputError("index needs N >= 1 tables");
  if (points->n() > 0xffffffffULL) throw InputError("point set too large for 32-bit ids");
  if (!factors.empty() && factors.size() != points->n())
    throw InputError("factor count does not match the point count");
  if (construction.kernel.bandwidth != 1.0) throw InputError("index expects a unit-bandwidth kernel");

  HbeIndex idx;
  idx.points_ = std::move(points);
  idx.construction_ = construction;
  idx.p_fn_ = std::make_shared<CollisionModel>(construction.spec);
  idx.master_seed_ = master_seed;
  idx.factors_ = std::move(factors);
  idx.table_begin_.assign(N + 1, 0);
  idx.regenerate_hashes();

  const std::size_t n = idx.points_->n();
  idx.ids_.resize(N * n);
  std::vector<TableData> tables(N);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(N)));
  auto work = [&](unsigned w) {
    for (std::size_t t = w; t < N; t += threads)
      tables[t] = build_table(*idx.points_, idx.hashes_[t], idx.ids_.data() + t * n);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  std::size_t total = 0;
  for (std::size_t t = 0; t < N; ++t) {
    idx.table_begin_[t] = total;
    total += tables[t].fp.size();
  }
  idx.table_begin_[N] = total;
  idx.bucket_fp_.reserve(total);
  idx.bucket_start_.reserve(total);
  for (auto& td : tables) {
    idx.bucket_fp_.insert(idx.bucket_fp_.end(), td.fp.begin(), td.fp.end());
    idx.bucket_start_.insert(idx.bucket_start_.end(), td.start.begin(), td.start.end());
    td = {};
  }
  return idx;
}

std::size_t HbeIndex::bucket_count(std::size_t table) const {
  return table_begin_[table + 1] - table_begin_[table];
}

HbeIndex::Bucket HbeIndex::bucket(std::size_t table, std::span<const double> x, HashWorkspace& ws) const {
  if (table >= num_tables()) throw InputError("table index out of range");
  if (x.size() != points_->d()) throw InputError("dimension mismatch in index query");
  std::uint64_t fp = hashes_[table].bucket(x, ws);
  auto first = bucket_fp_.begin() + table_begin_[table];
  auto last = bucket_fp_.begin() + table_begin_[table + 1];
  auto it = std::lower_bound(first, last, fp);
  if (it == last || *it != fp) return {};
  std::size_t b = static_cast<std::size_t>(it - bucket_fp_.begin());
  std::size_t begin = bucket_start_[b];
  std::size_t end = (b + 1 < table_begin_[table + 1]) ? bucket_start_[b + 1] : points_->n();
  return {ids_.data() + table * points_->n() + begin, end - begin};
}

double HbeIndex::sample(std::size_t table, std::span<const double> x, Rng& rng, HashWorkspace& ws) const {
  Bucket B = bucket(table, x, ws);
  if (B.size == 0) return 0.0;
  std::uniform_int_distribution<std::size_t> pick(0, B.size - 1);
  std::uint32_t y = B.ids[pick(rng)];
  double r = distance(x, points_->row(y));
  double k = unit_kernel(construction_.kernel.kind, construction_.kernel.p, r);
  if (k == 0.0) return 0.0;
  double p = (*p_fn_)(r);
  double a = factors_.empty() ? 1.0 : factors_[y];
  return a * (k / p) * static_cast<double>(B.size) / static_cast<double>(points_->n());
}

double HbeIndex::V(double mu) const { return construction_.variance(mu); }

HbeSession::HbeSession(const HbeIndex& index, std::span<const double> x, std::uint64_t seed)
    : index_(&index), x_(x.begin(), x.end()), rng_(seed) {
  if (x.size() != index.points().d()) throw InputError("dimension mismatch in query session");
  std::uniform_int_distribution<std::size_t> start(0, index.num_tables() - 1);
  offset_ = start(rng_);
}

double HbeSession::draw() {
  if (used_ >= index_->num_tables())
    throw ResourceError("all tables consumed in this query session", used_);
  std::size_t table = (offset_ + used_) % index_->num_tables();
  ++used_;
  return index_->sample(table, x_, rng_, ws_);
}

} // namespace hbe
