#pragma once

// Counter-based generator: the value for (seed, stream, counter) is a pure
// function, so any cell can be resampled independently of the others.
// Algorithm id "splitmix64-ctr-v1": x = seed ^ (stream * G1) ^ (counter * G2),
// followed by two splitmix64 finalizer rounds.

#include <cstdint>

namespace beurling {

inline constexpr const char* kRngAlgorithm = "splitmix64-ctr-v1";

inline std::uint64_t splitmix_mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t x = seed ^ (stream * 0xd1b54a32d192ed03ULL) ^ (counter * 0xaef17502108ef2d9ULL);
  return splitmix_mix(splitmix_mix(x));
}

// Uniform double in the open interval (0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return (static_cast<double>(counter_hash(seed, stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

// Sequential view of one substream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  double uniform() { return counter_uniform(seed_, stream_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next_u64() { return counter_hash(seed_, stream_, counter_++); }

 private:
  std::uint64_t seed_, stream_, counter_ = 0;
};

}  // namespace beurling
