#pragma once

#include "hbe/kernels.hpp"
#include "hbe/random.hpp"
#include "hbe/sampler.hpp"

#include <memory>
#include <span>
#include <vector>

namespace hbe {

// Z = a_Y k(x, Y) with Y uniform in P (a = 1 unless factors are given).
double rs_sample(const PointSet& P, const KernelSpec& kernel, std::span<const double> x, Rng& rng);

double rs_variance(double mu);

class RandomSamplingSource : public SampleSource {
public:
  RandomSamplingSource(std::shared_ptr<const PointSet> points, KernelSpec kernel, std::span<const double> x,
                       std::uint64_t seed, std::vector<double> factors = {});
  double draw() override;

private:
  std::shared_ptr<const PointSet> points_;
  KernelSpec kernel_;
  std::vector<double> x_;
  std::vector<double> factors_;
  Rng rng_;
};

// Z = (2/|P|) sum_y cos(w.x + b) cos(w.y + b), w ~ N(0, 2 I), b ~ U[0, 2 pi]; unit Gaussian kernel
// after bandwidth normalization.
class RffSource : public SampleSource {
public:
  RffSource(std::shared_ptr<const PointSet> points, KernelSpec kernel, std::span<const double> x,
            std::uint64_t seed);
  double draw() override;

private:
  std::shared_ptr<const PointSet> points_;
  std::vector<double> x_;
  Rng rng_;
  std::vector<double> omega_;
};

double rff_sample(const PointSet& P, const KernelSpec& kernel, std::span<const double> x, Rng& rng);

// Exact E[Z^2] of the RFF estimator:
// 1/n + (1/(2n^2)) sum_y k(2x,2y) + (1/n^2) sum_{y != z} [k(y,z) + k(2x, y+z)/2].
double rff_second_moment(const PointSet& P, const KernelSpec& kernel, std::span<const double> x);

// Z = v * Bernoulli(mu / v): mean mu, relative variance v / mu.
class BernoulliSource : public SampleSource {
public:
  BernoulliSource(double mu, std::uint64_t seed, double v = 1.0);
  double draw() override;
  double draw_sum(std::uint64_t k) override;
  double mean() const { return mu_; }

private:
  double mu_;
  double v_;
  Rng rng_;
};

class ConstantSource : public SampleSource {
public:
  explicit ConstantSource(double value) : value_(value) {}
  double draw() override { return value_; }
  double draw_sum(std::uint64_t k) override { return value_ * static_cast<double>(k); }
  double draw_mean(std::uint64_t) override { return value_; }

private:
  double value_;
};

} // namespace hbe
