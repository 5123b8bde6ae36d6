#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

namespace hbe {

// Source of i.i.d. samples of an unbiased estimator.
class SampleSource {
public:
  virtual ~SampleSource() = default;
  virtual double draw() = 0;
  // Sum of k fresh draws; overridden where the sum has a closed-form law.
  virtual double draw_sum(std::uint64_t k);
  // Mean of k fresh draws (k > 0).
  virtual double draw_mean(std::uint64_t k) { return draw_sum(k) / static_cast<double>(k); }
  // Draws left before the source is exhausted.
  virtual std::uint64_t remaining() const { return std::numeric_limits<std::uint64_t>::max(); }
};

using VarianceFn = std::function<double(double)>;

// Source plus relative variance bound V(mu); V non-increasing and mu^2 V(mu) non-decreasing.
class EstimatorHandle {
public:
  EstimatorHandle(SampleSource& source, VarianceFn V, std::optional<std::uint64_t> budget = std::nullopt);

  double V(double mu) const { return V_(mu); }
  const VarianceFn& variance() const { return V_; }
  double draw();
  double draw_sum(std::uint64_t k);
  double draw_mean(std::uint64_t k);
  std::uint64_t samples_used() const { return used_; }

private:
  void reserve(std::uint64_t k);

  SampleSource* source_;
  VarianceFn V_;
  std::optional<std::uint64_t> budget_;
  std::uint64_t used_ = 0;
};

// Throws InputError if V violates the monotonicity conditions on a log grid over [mu_min, 1].
void validate_variance_fn(const VarianceFn& V, double mu_min = 1e-9);

} // namespace hbe
