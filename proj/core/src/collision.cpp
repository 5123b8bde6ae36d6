#include "hbe/construction.hpp"
#include "hbe/error.hpp"
#include "hbe/sampler.hpp"

#include <cmath>

namespace hbe {

SchemeTag scheme_tag(const HashSpec& spec) {
  return std::holds_alternative<EuclideanSpec>(spec) ? SchemeTag::Euclidean : SchemeTag::BallCarving;
}

CollisionModel::CollisionModel(const HashSpec& spec) : spec_(spec) {
  if (const auto* b = std::get_if<BallCarvingSpec>(&spec_)) table_ = &ball_collision_table(b->t, b->U);
}

double CollisionModel::operator()(double r) const {
  if (const auto* e = std::get_if<EuclideanSpec>(&spec_))
    return std::pow(collision_prob_euclidean(r / e->w), e->D);
  const auto& b = std::get<BallCarvingSpec>(spec_);
  return std::pow((*table_)(r / b.w), b.D);
}

HashFunction HashFunction::sample(const HashSpec& spec, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  HashFunction f;
  if (const auto* e = std::get_if<EuclideanSpec>(&spec)) {
    f.h_ = sample_euclidean(e->w, e->D, d, rng);
  } else {
    const auto& b = std::get<BallCarvingSpec>(spec);
    f.h_ = BallCarvingHash(b.t, b.w, b.D, b.U, d, rng);
  }
  return f;
}

std::uint64_t HashFunction::bucket(std::span<const double> x, HashWorkspace& ws) const {
  if (const auto* e = std::get_if<EuclideanHash>(&h_)) {
    ws.key.resize(e->D);
    eval_euclidean(*e, x, ws.key.data());
    return fingerprint(ws.key);
  }
  return std::get<BallCarvingHash>(h_).key_fingerprint(x, ws.ball);
}

double VarianceModel::operator()(double mu) const {
  if (!(mu > 0.0)) return std::numeric_limits<double>::infinity();
  mu = std::min(mu, 1.0);
  double v = 0.0;
  switch (kind) {
  case VarianceKind::ScaleFree:
    v = 4.0 * M * M * M * std::pow(mu, -beta);
    break;
  case VarianceKind::GaussianEuclid: {
    double g = mu >= 1.0 ? 1.0 : std::min(1.0, t / std::sqrt(std::log(1.0 / mu)));
    v = 4.0 * std::exp(1.5) * std::pow(mu, -g * g + g - 1.0);
    break;
  }
  case VarianceKind::RandomSampling:
    v = 1.0 / mu;
    break;
  }
  return factor * std::min(v, clamp / mu);
}

double SampleSource::draw_sum(std::uint64_t k) {
  double s = 0.0;
  for (std::uint64_t i = 0; i < k; ++i) s += draw();
  return s;
}

EstimatorHandle::EstimatorHandle(SampleSource& source, VarianceFn V, std::optional<std::uint64_t> budget)
    : source_(&source), V_(std::move(V)), budget_(budget) {
  validate_variance_fn(V_);
}

void EstimatorHandle::reserve(std::uint64_t k) {
  if ((budget_ && used_ + k > *budget_) || k > source_->remaining())
    throw ResourceError("sample budget exhausted", used_);
}

double EstimatorHandle::draw() {
  reserve(1);
  ++used_;
  return source_->draw();
}

double EstimatorHandle::draw_sum(std::uint64_t k) {
  reserve(k);
  used_ += k;
  return source_->draw_sum(k);
}

double EstimatorHandle::draw_mean(std::uint64_t k) {
  reserve(k);
  used_ += k;
  return source_->draw_mean(k);
}

void validate_variance_fn(const VarianceFn& V, double mu_min) {
  const int steps = 400;
  double prev_v = std::numeric_limits<double>::infinity();
  double prev_m2v = 0.0;
  for (int i = 0; i <= steps; ++i) {
    double mu = std::exp(std::log(mu_min) * (1.0 - static_cast<double>(i) / steps));
    double v = V(mu);
    if (!(v >= 0.0)) throw InputError("variance bound must be nonnegative");
    double m2v = mu * mu * v;
    if (v > prev_v * (1.0 + 1e-9)) throw InputError("variance bound V(mu) must be non-increasing");
    if (m2v < prev_m2v * (1.0 - 1e-9)) throw InputError("mu^2 V(mu) must be non-decreasing");
    prev_v = v;
    prev_m2v = m2v;
  }
}

} // namespace hbe
