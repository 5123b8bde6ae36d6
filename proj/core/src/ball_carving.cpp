#include "hbe/error.hpp"
#include "hbe/lsh.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace hbe {

double unit_ball_volume(int t) {
  return std::pow(std::numbers::pi, 0.5 * t) / boost::math::tgamma(0.5 * t + 1.0);
}

double ball_grid_cover_prob(int t) {
  // det(sqrt(2) D_t) = 2 * 2^{t/2} in units of w.
  return unit_ball_volume(t) / (2.0 * std::pow(2.0, 0.5 * t));
}

int ball_carving_grid_count(int t, std::size_t n_hint) {
  if (t < 2) throw InputError("ball carving needs t >= 2");
  double q = ball_grid_cover_prob(t);
  double U = std::ceil(std::log(100.0 * static_cast<double>(std::max<std::size_t>(n_hint, 1))) / q);
  if (U > 1e6)
    throw ConfigError("ball carving grid count exceeds 10^6 for t=" + std::to_string(t));
  return static_cast<int>(U);
}

double nearest_dt_point(const double* y, const double* shift, int t, std::int32_t* z) {
  long parity = 0;
  double d2 = 0.0;
  int worst = 0;
  double worst_gap = -1.0;
  for (int k = 0; k < t; ++k) {
    double v = y[k] - shift[k];
    double r = std::nearbyint(v);
    double e = v - r;
    z[k] = static_cast<std::int32_t>(r);
    parity += z[k];
    d2 += e * e;
    double ae = std::fabs(e);
    if (ae > worst_gap) {
      worst_gap = ae;
      worst = k;
    }
  }
  if (parity & 1) {
    // Re-round the worst coordinate the other way.
    double v = y[worst] - shift[worst];
    double e = v - z[worst];
    z[worst] += (e >= 0.0) ? 1 : -1;
    double e2 = v - z[worst];
    d2 += e2 * e2 - e * e;
  }
  return d2;
}

static std::uint64_t coordinate_token(std::span<const double> x) {
  std::vector<std::int64_t> bits(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) bits[k] = std::bit_cast<std::int64_t>(x[k] == 0.0 ? 0.0 : x[k]);
  return fingerprint(bits);
}

BallCarvingHash::BallCarvingHash(int t, double w, int D, int U, std::size_t d, Rng& rng)
    : t_(t), w_(w), D_(D), U_(U), d_(d) {
  if (t < 2 || !(w > 0.0) || D < 1 || U < 1 || d < 1)
    throw InputError("ball carving needs t >= 2, w > 0, D >= 1, U >= 1, d >= 1");
  proj_.resize(static_cast<std::size_t>(D) * t * d);
  std::normal_distribution<double> normal;
  const double scale = 1.0 / (std::sqrt(static_cast<double>(t)) * std::numbers::sqrt2 * w);
  for (double& v : proj_) v = normal(rng) * scale;
  shift_key_ = rng();
}

void BallCarvingHash::project(int copy, std::span<const double> x, double* out) const {
  if (x.size() != d_) throw InputError("dimension mismatch in ball carving hash");
  const double* A = proj_.data() + static_cast<std::size_t>(copy) * t_ * d_;
  for (int k = 0; k < t_; ++k) {
    double s = 0.0;
    const double* a = A + k * d_;
    for (std::size_t j = 0; j < d_; ++j) s += a[j] * x[j];
    out[k] = s;
  }
}

const double* BallCarvingHash::shift(int copy, int u, Workspace& ws) const {
  if (ws.owner != shift_key_ || ws.shifts.size() != static_cast<std::size_t>(D_)) {
    ws.shifts.assign(D_, {});
    ws.owner = shift_key_;
  }
  auto& s = ws.shifts[copy];
  std::size_t need = static_cast<std::size_t>(u + 1) * t_;
  if (s.size() < need) {
    std::size_t have = s.size() / t_;
    s.resize(need);
    for (std::size_t v = have; v <= static_cast<std::size_t>(u); ++v) {
      std::uint64_t key = derive_seed(shift_key_, static_cast<std::uint64_t>(copy), v);
      for (int k = 0; k < t_; ++k) s[v * t_ + k] = 2.0 * counter_uniform(key, k);
    }
  }
  return s.data() + static_cast<std::size_t>(u) * t_;
}

int BallCarvingHash::first_cover(int copy, const double* y, int limit, Workspace& ws,
                                 std::int32_t* z) const {
  limit = std::min(limit, U_);
  for (int u = 0; u < limit; ++u)
    if (nearest_dt_point(y, shift(copy, u, ws), t_, z) <= radius2) return u;
  return -1;
}

std::vector<std::int64_t> BallCarvingHash::key(std::span<const double> x, Workspace& ws) const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(D_) * (t_ + 1), 0);
  ws.proj.resize(t_);
  ws.z.resize(t_);
  for (int c = 0; c < D_; ++c) {
    project(c, x, ws.proj.data());
    std::int64_t* o = out.data() + static_cast<std::size_t>(c) * (t_ + 1);
    int u = first_cover(c, ws.proj.data(), U_, ws, ws.z.data());
    if (u < 0) {
      o[0] = -1;
      o[1] = static_cast<std::int64_t>(coordinate_token(x));
    } else {
      o[0] = u;
      for (int k = 0; k < t_; ++k) o[k + 1] = ws.z[k];
    }
  }
  return out;
}

std::uint64_t BallCarvingHash::key_fingerprint(std::span<const double> x, Workspace& ws) const {
  return fingerprint(key(x, ws));
}

BallCarvingHash sample_ball_carving(int t, double w, int D, std::size_t d, std::size_t n_hint, Rng& rng) {
  int U = ball_carving_grid_count(t, n_hint);
  return BallCarvingHash(t, w, D, U, d, rng);
}

std::vector<std::int64_t> eval_ball_carving(const BallCarvingHash& h, std::span<const double> x) {
  BallCarvingHash::Workspace ws;
  return h.key(x, ws);
}

CollisionBound collision_prob_ball_bounds(int t, double c) {
  if (t < 12) throw DomainError("ball carving bounds need t >= 12");
  double c2 = c * c;
  if (!(c > 0.0) || c2 < 16.0 / (t + 7.0) * (1.0 - 1e-12) || c2 > 1.0)
    throw DomainError("c outside the validity region 16/(t+7) <= c^2 <= 1");
  double st = std::sqrt(static_cast<double>(t));
  double a = (t - 1.0) / 8.0;
  double core = std::exp(-a * c2);
  double lower = (1.0 / (4.0 * st * c)) * (1.0 - 2.0 * std::exp(-9.0 * t / 100.0)) *
                 std::exp(-a * c2 * c2 / (2.0 - c2)) * core;
  double upper = (3.0 / (st * c)) * (1.0 + (st * c / 3.0) * std::exp(-9.0 * t / 64.0)) *
                 std::exp((t - 1.0) / 64.0 * c2 * c2) * core;
  return {lower, upper};
}

double chi_square_tail(int t, double a, TailSide side) {
  if (t < 1) throw InputError("degrees of freedom must be >= 1");
  if (side == TailSide::Below) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("lower tail bound needs 0 < a < 1");
    return std::exp(-(a + std::log(1.0 / a) - 1.0) * t / 2.0);
  }
  if (!(a > 1.0)) throw DomainError("upper tail bound needs a > 1");
  return std::exp(-(a - std::log(a) - 1.0) * t / 2.0);
}

double ball_pair_collision(int t, double rho, int U) {
  if (rho >= 2.0) return 0.0;
  if (rho <= 0.0) return 1.0 - std::pow(1.0 - ball_grid_cover_prob(t), U);
  double h = 0.5 * rho;
  double I = 0.5 * boost::math::ibeta(0.5 * (t + 1), 0.5, 1.0 - h * h);
  double g = I / (1.0 - I);
  double q = ball_grid_cover_prob(t);
  double miss = std::exp(U * std::log1p(-q * (2.0 - 2.0 * I)));
  return g * (1.0 - miss);
}

double ball_copy_collision_prob(int t, double c, int U) {
  if (!(c >= 0.0)) throw InputError("normalized distance must be >= 0");
  // Identical points share even the uncovered token.
  if (c == 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> chi(t);
  // Projected length is c * s with s = sqrt(X/t); integrate over s.
  double s_hi = std::sqrt(boost::math::quantile(boost::math::complement(chi, 1e-18)) / t);
  s_hi = std::min(s_hi, 2.0 / c);
  auto f = [&](double s) {
    if (s <= 0.0) return 0.0;
    double x = t * s * s;
    return ball_pair_collision(t, c * s, U) * boost::math::pdf(chi, x) * 2.0 * t * s;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double mid = std::min(1.0, s_hi);
  double v = GK::integrate(f, 0.0, mid, 12, 1e-13);
  if (s_hi > mid) v += GK::integrate(f, mid, s_hi, 12, 1e-13);
  return std::clamp(v, 0.0, 1.0);
}

BallCollisionTable::BallCollisionTable(int t, int U) : t_(t), U_(U) {
  constexpr int kPoints = 2048;
  c_max_ = 4.0;
  h_ = c_max_ / (kPoints - 1);
  logp_.resize(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    double p = i == 0 ? ball_pair_collision(t, 0.0, U) : ball_copy_collision_prob(t, i * h_, U);
    logp_[i] = p > 0.0 ? std::log(p) : -745.0;
  }
}

double BallCollisionTable::operator()(double c) const {
  if (!(c >= 0.0)) throw InputError("normalized distance must be >= 0");
  if (c == 0.0) return 1.0;
  if (c >= c_max_ - 2.0 * h_) return ball_copy_collision_prob(t_, c, U_);
  double s = c / h_;
  int i = static_cast<int>(s);
  double f = s - i;
  // Catmull-Rom on log p, one-sided at the origin.
  double p1 = logp_[i], p2 = logp_[i + 1], p3 = logp_[i + 2];
  double p0 = i > 0 ? logp_[i - 1] : 3.0 * p1 - 3.0 * p2 + p3;
  double v = p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
  return std::exp(v);
}

const BallCollisionTable& ball_collision_table(int t, int U) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<BallCollisionTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{t, U}];
  if (!slot) slot = std::make_unique<BallCollisionTable>(t, U);
  return *slot;
}

} // namespace hbe
