#include "hbe/error.hpp"
#include "hbe/index.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hbe {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

FreshHashSampler::FreshHashSampler(std::shared_ptr<const PointSet> points, const HbeConstruction& construction,
                                   std::span<const double> x, std::uint64_t master_seed,
                                   std::uint64_t first_table, std::vector<double> factors)
    : points_(std::move(points)), construction_(construction), p_fn_(construction.spec), x_(x.begin(), x.end()),
      master_seed_(master_seed), next_(first_table), factors_(std::move(factors)),
      rng_(derive_seed(master_seed, Stream::Sampler, first_table)) {
  const PointSet& P = *points_;
  if (x.size() != P.d()) throw InputError("dimension mismatch in fresh-hash sampler");
  if (!factors_.empty() && factors_.size() != P.n()) throw InputError("factor count does not match the point count");
  // Group identical points; they always share a bucket.
  std::vector<std::uint32_t> order(P.n());
  std::iota(order.begin(), order.end(), 0u);
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    auto ra = P.row(a), rb = P.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end()) || (std::equal(ra.begin(), ra.end(), rb.begin()) && a < b);
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto r = P.row(order[k]);
    if (k == 0 || !std::equal(r.begin(), r.end(), P.row(order[k - 1]).begin())) {
      unique_.insert(unique_.end(), r.begin(), r.end());
      members_.emplace_back();
    }
    members_.back().push_back(order[k]);
  }
}

std::vector<std::uint32_t> FreshHashSampler::unique_bucket(const HashFunction& h) {
  if (const auto* e = h.euclidean()) return unique_bucket_euclidean(*e);
  return unique_bucket_ball(*h.ball());
}

std::vector<std::uint32_t> FreshHashSampler::unique_bucket_euclidean(const EuclideanHash& h) {
  const std::size_t d = points_->d();
  const Eigen::Index m = static_cast<Eigen::Index>(members_.size());
  Eigen::Map<const RowMat> G(h.g.data(), h.D, static_cast<Eigen::Index>(d));
  Eigen::Map<const Eigen::MatrixXd> Y(unique_.data(), static_cast<Eigen::Index>(d), m);
  Eigen::MatrixXd proj = G * Y;
  std::vector<std::int64_t> kx = eval_euclidean(h, x_);
  std::vector<std::uint32_t> out;
  for (Eigen::Index i = 0; i < m; ++i) {
    bool same = true;
    for (int j = 0; j < h.D && same; ++j)
      same = static_cast<std::int64_t>(std::ceil((h.b[j] + proj(j, i)) / h.w)) == kx[j];
    if (same) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

std::vector<std::uint32_t> FreshHashSampler::unique_bucket_ball(const BallCarvingHash& h) {
  const int t = h.t();
  const std::size_t d = points_->d();
  const double rho = std::sqrt(BallCarvingHash::radius2);
  auto& ws = ws_.ball;
  std::vector<std::uint32_t> cand(members_.size());
  std::iota(cand.begin(), cand.end(), 0u);
  std::vector<double> yx(t);
  std::vector<std::int32_t> zx(t), ztmp(t);
  Eigen::Map<const Eigen::MatrixXd> Y(unique_.data(), static_cast<Eigen::Index>(d),
                                      static_cast<Eigen::Index>(members_.size()));
  Eigen::MatrixXd Yc;
  struct Kept {
    double delta;
    Eigen::Index col;
    std::uint32_t id;
    bool alive;
  };
  std::vector<Kept> kept;
  for (int c = 0; c < h.D() && !cand.empty(); ++c) {
    h.project(c, x_, yx.data());
    int ux = h.first_cover(c, yx.data(), h.U(), ws, zx.data());
    if (ux < 0) {
      // Uncovered: only points identical to x share its token.
      for (std::uint32_t i : cand)
        if (std::equal(x_.begin(), x_.end(), unique_.begin() + static_cast<std::ptrdiff_t>(i * d))) return {i};
      return {};
    }
    Eigen::Map<const RowMat> A(h.projections().data() + static_cast<std::size_t>(c) * t * d, t,
                               static_cast<Eigen::Index>(d));
    Yc.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(cand.size()));
    for (std::size_t i = 0; i < cand.size(); ++i) Yc.col(static_cast<Eigen::Index>(i)) = Y.col(cand[i]);
    Eigen::MatrixXd Py = A * Yc;
    const double* sx = h.shift(c, ux, ws);
    kept.clear();
    for (std::size_t i = 0; i < cand.size(); ++i) {
      const double* y = Py.data() + static_cast<Eigen::Index>(i) * t;
      double d2 = 0.0, dx2 = 0.0;
      for (int k = 0; k < t; ++k) {
        double e = y[k] - sx[k] - zx[k];
        d2 += e * e;
        double f = y[k] - yx[k];
        dx2 += f * f;
      }
      if (d2 <= BallCarvingHash::radius2) kept.push_back({std::sqrt(dx2), static_cast<Eigen::Index>(i), cand[i], true});
    }
    std::sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) { return a.delta > b.delta; });
    // A point within delta of x can only be covered by grid u if x is within delta + rho of it.
    for (int u = 0; u < ux && !kept.empty(); ++u) {
      const double* s = h.shift(c, u, ws);
      double thr = std::sqrt(nearest_dt_point(yx.data(), s, t, ztmp.data())) - rho;
      for (auto& k : kept) {
        if (k.delta < thr) break;
        if (k.alive && nearest_dt_point(Py.data() + k.col * t, s, t, ztmp.data()) <= BallCarvingHash::radius2)
          k.alive = false;
      }
    }
    cand.clear();
    for (const auto& k : kept)
      if (k.alive) cand.push_back(k.id);
    std::sort(cand.begin(), cand.end());
  }
  return cand;
}

std::vector<std::uint32_t> FreshHashSampler::bucket(std::uint64_t table) {
  HashFunction h = HashFunction::sample(construction_.spec, points_->d(), derive_seed(master_seed_, Stream::Table, table));
  std::vector<std::uint32_t> out;
  for (std::uint32_t u : unique_bucket(h)) out.insert(out.end(), members_[u].begin(), members_[u].end());
  std::sort(out.begin(), out.end());
  return out;
}

double FreshHashSampler::draw() {
  HashFunction h = HashFunction::sample(construction_.spec, points_->d(), derive_seed(master_seed_, Stream::Table, next_));
  ++next_;
  std::vector<std::uint32_t> ub = unique_bucket(h);
  std::size_t total = 0;
  for (std::uint32_t u : ub) total += members_[u].size();
  if (total == 0) return 0.0;
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  std::size_t r = pick(rng_);
  std::uint32_t g = 0;
  for (std::uint32_t u : ub) {
    if (r < members_[u].size()) {
      g = u;
      break;
    }
    r -= members_[u].size();
  }
  std::uint32_t id = members_[g][r];
  const std::size_t d = points_->d();
  double dist = distance(x_, {unique_.data() + static_cast<std::size_t>(g) * d, d});
  double k = unit_kernel(construction_.kernel.kind, construction_.kernel.p, dist);
  if (k == 0.0) return 0.0;
  double p = p_fn_(dist);
  double a = factors_.empty() ? 1.0 : factors_[id];
  return a * (k / p) * static_cast<double>(total) / static_cast<double>(points_->n());
}

} // namespace hbe
