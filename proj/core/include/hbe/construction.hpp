#pragma once

#include "hbe/kernels.hpp"
#include "hbe/lsh.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hbe {

struct EuclideanSpec {
  double w = 1.0;
  int D = 1;
};

struct BallCarvingSpec {
  int t = 12;
  double w = 1.0;
  int D = 1;
  int U = 1;
};

using HashSpec = std::variant<EuclideanSpec, BallCarvingSpec>;

enum class SchemeTag : std::uint8_t { Euclidean = 1, BallCarving = 2 };
SchemeTag scheme_tag(const HashSpec& spec);

// Collision probability as a function of distance, p_fn(r).
class CollisionModel {
public:
  explicit CollisionModel(const HashSpec& spec);
  double operator()(double r) const;

private:
  HashSpec spec_;
  const BallCollisionTable* table_ = nullptr;
};

struct HashWorkspace {
  BallCarvingHash::Workspace ball;
  std::vector<std::int64_t> key;
};

// One sampled member of the family described by a HashSpec.
class HashFunction {
public:
  static HashFunction sample(const HashSpec& spec, std::size_t d, std::uint64_t seed);

  // Bucket fingerprint.
  std::uint64_t bucket(std::span<const double> x, HashWorkspace& ws) const;

  const EuclideanHash* euclidean() const { return std::get_if<EuclideanHash>(&h_); }
  const BallCarvingHash* ball() const { return std::get_if<BallCarvingHash>(&h_); }

private:
  std::variant<EuclideanHash, BallCarvingHash> h_;
};

enum class VarianceKind : std::uint8_t { ScaleFree = 1, GaussianEuclid = 2, RandomSampling = 3 };

// Relative variance bound V(mu).
//   ScaleFree:       4 M^3 mu^{-beta}
//   GaussianEuclid:  4 e^{3/2} mu^{-g^2+g-1}, g = t/sqrt(ln(1/mu)) (capped at 1)
//   RandomSampling:  1/mu
// then min(., clamp/mu), times factor.
struct VarianceModel {
  VarianceKind kind = VarianceKind::RandomSampling;
  double beta = 1.0;
  double M = 1.0;
  double t = 1.0;
  double clamp = std::numeric_limits<double>::infinity();
  double factor = 1.0;

  double operator()(double mu) const;
};

struct HbeConstruction {
  std::string method;     // hbe-exp, hbe-student, hbe-gauss-euclid, hbe-gauss-ball
  KernelSpec kernel;      // unit bandwidth
  HashSpec spec;
  double R = 0.0;         // diameter bound the parameters were derived for
  double beta = 1.0;
  double M = 1.0;         // distortion used by the variance bound
  double M_measured = 1.0;  // sandwich constant of p_fn against k^beta on [0, R]
  double clamp = 1.0;     // sup k/p_fn on [0, R]
  double hash_cost = 0.0; // multiply-adds per hash evaluation per input dimension
  VarianceModel variance;
  double gaussian_t = 0.0;
};

HbeConstruction make_exponential_hbe(double R, double beta);
HbeConstruction make_student_hbe(int p, int q);
HbeConstruction make_gaussian_euclid_hbe(double R, double t);
HbeConstruction make_gaussian_ball_hbe(double R, double beta, std::size_t n);

// Same construction dispatched by method name, with the parameter set of RunConfig.
struct ConstructionParams {
  double beta = 0.5;
  double t = 1.0;   // Gaussian-Euclid
  int p = 2;        // t-Student
  int q = 1;
};
HbeConstruction make_construction(const std::string& method, double R, std::size_t n,
                                  const ConstructionParams& params);

// Sandwich constant of p_fn against k^beta and sup k/p_fn on a uniform r-grid over [0, R].
struct SandwichReport {
  double M = 1.0;
  double max_ratio = 1.0;
};
SandwichReport measure_sandwich(const KernelSpec& kernel, const CollisionModel& p_fn, double beta,
                                double R, int points = 2001);

} // namespace hbe
