#ifndef SCCA_RANDOM_HPP
#define SCCA_RANDOM_HPP

#include <cstdint>

namespace scca {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent child seed for stream `index` of a master seed. Replications
/// and re-orderings each get their own generator, so they can run in any
/// order or in parallel without changing results.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t domain = 0) {
  return mix64(mix64(master ^ mix64(domain)) + index);
}

}  // namespace scca

#endif  // SCCA_RANDOM_HPP
