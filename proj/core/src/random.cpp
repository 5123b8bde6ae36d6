#include "hbe/random.hpp"

namespace hbe {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Stream tag, std::uint64_t index) {
  return derive_seed(master, static_cast<std::uint64_t>(tag), index);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix64(parent);
  h = mix64(h ^ (a * 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ (b * 0x8cb92ba72f3d8dd7ULL));
  return h;
}

double counter_uniform(std::uint64_t key, std::uint64_t k) {
  std::uint64_t v = mix64(key ^ mix64(k));
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

} // namespace hbe
