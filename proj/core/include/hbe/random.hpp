#pragma once

#include <cstdint>
#include <random>

namespace hbe {

using Rng = std::mt19937_64;

// Stream tags for seed derivation. A stream is identified by
// (master seed, tag, index); new tags or indices never perturb existing ones.
enum class Stream : std::uint64_t {
  Table = 1,
  Query = 2,
  Sampler = 3,
  Kmvm = 4,
  Bench = 5,
  Dataset = 6,
  Verify = 7,
  Shift = 8,
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, Stream tag, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b);

inline Rng make_rng(std::uint64_t master, Stream tag, std::uint64_t index) {
  return Rng(derive_seed(master, tag, index));
}

// Uniform double in [0,1) from a counter: the k-th value of the stream `key`.
double counter_uniform(std::uint64_t key, std::uint64_t k);

} // namespace hbe
