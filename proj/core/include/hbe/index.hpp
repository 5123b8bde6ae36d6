#pragma once

#include "hbe/construction.hpp"
#include "hbe/kernels.hpp"
#include "hbe/random.hpp"
#include "hbe/sampler.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace hbe {

// N immutable hash tables over a unit-bandwidth point set.
class HbeIndex {
public:
  struct Bucket {
    const std::uint32_t* ids = nullptr;
    std::size_t size = 0;
  };

  // Table i uses the hash sampled from derive_seed(master_seed, Stream::Table, i).
  // factors (optional, one per point) multiply the sample of the chosen resident.
  static HbeIndex build(std::shared_ptr<const PointSet> points, const HbeConstruction& construction,
                        std::size_t N, std::uint64_t master_seed, std::vector<double> factors = {},
                        unsigned threads = 1);

  std::size_t num_tables() const { return hashes_.size(); }
  const PointSet& points() const { return *points_; }
  std::shared_ptr<const PointSet> points_ptr() const { return points_; }
  const HbeConstruction& construction() const { return construction_; }
  const CollisionModel& collision() const { return *p_fn_; }
  std::uint64_t master_seed() const { return master_seed_; }
  const std::vector<double>& factors() const { return factors_; }
  const HashFunction& hash(std::size_t table) const { return hashes_[table]; }

  // Bucket of x in the given table, ids sorted ascending.
  Bucket bucket(std::size_t table, std::span<const double> x, HashWorkspace& ws) const;
  std::size_t bucket_count(std::size_t table) const;

  // One HBE sample: (a_y k(x,y)/p(x,y)) |H(x)|/n with y uniform in H(x), or 0 if H(x) is empty.
  double sample(std::size_t table, std::span<const double> x, Rng& rng, HashWorkspace& ws) const;

  // Relative variance bound of the estimator served by this index.
  double V(double mu) const;

  void serialize(std::ostream& out) const;
  std::vector<unsigned char> serialize() const;
  static HbeIndex deserialize(std::istream& in, std::shared_ptr<const PointSet> points);

private:
  void regenerate_hashes();

  std::shared_ptr<const PointSet> points_;
  HbeConstruction construction_;
  std::shared_ptr<CollisionModel> p_fn_;
  std::uint64_t master_seed_ = 0;
  std::vector<double> factors_;
  std::vector<HashFunction> hashes_;
  // Per table: buckets [table_begin_[t], table_begin_[t+1]) in bucket_fp_/bucket_start_,
  // ids of table t occupy ids_[t*n, (t+1)*n).
  std::vector<std::uint64_t> table_begin_;
  std::vector<std::uint64_t> bucket_fp_;
  std::vector<std::uint32_t> bucket_start_;
  std::vector<std::uint32_t> ids_;
};

// Query session over an index: consumes tables cyclically from a random offset and never
// reuses a table.
class HbeSession : public SampleSource {
public:
  HbeSession(const HbeIndex& index, std::span<const double> x, std::uint64_t seed);
  double draw() override;
  std::uint64_t remaining() const override { return index_->num_tables() - used_; }
  std::uint64_t tables_used() const { return used_; }
  std::size_t start_offset() const { return offset_; }

private:
  const HbeIndex* index_;
  std::vector<double> x_;
  Rng rng_;
  std::size_t offset_ = 0;
  std::uint64_t used_ = 0;
  HashWorkspace ws_;
};

// HBE sampler that draws a fresh hash function for every sample and evaluates the bucket of
// the query by scanning the point set. Same law as an index with unboundedly many tables;
// sample j uses the hash an index with the same master seed would use for table j.
class FreshHashSampler : public SampleSource {
public:
  FreshHashSampler(std::shared_ptr<const PointSet> points, const HbeConstruction& construction,
                   std::span<const double> x, std::uint64_t master_seed, std::uint64_t first_table = 0,
                   std::vector<double> factors = {});
  double draw() override;

  // Sorted ids of the points sharing the query's bucket under table j's hash.
  std::vector<std::uint32_t> bucket(std::uint64_t table);
  std::uint64_t next_table() const { return next_; }

private:
  std::vector<std::uint32_t> unique_bucket(const HashFunction& h);
  std::vector<std::uint32_t> unique_bucket_euclidean(const EuclideanHash& h);
  std::vector<std::uint32_t> unique_bucket_ball(const BallCarvingHash& h);

  std::shared_ptr<const PointSet> points_;
  HbeConstruction construction_;
  CollisionModel p_fn_;
  std::vector<double> x_;
  std::uint64_t master_seed_;
  std::uint64_t next_;
  std::vector<double> factors_;
  Rng rng_;
  // Distinct points, column-major d x m, with member lists.
  std::vector<double> unique_;
  std::vector<std::vector<std::uint32_t>> members_;
  HashWorkspace ws_;
};

} // namespace hbe
