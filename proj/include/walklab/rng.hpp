#pragma once

// Deterministic, splittable randomness.
//
// Every experiment draws from per-stream engines derived from a single master
// seed.  Stream derivation uses the SplitMix64 output function applied to
// master + index * 2^64/phi (Steele, Lea, Flood 2014): streams are cheap to
// derive in O(1), uncorrelated in practice, and — crucially — the mapping is
// pinned here, so identical (seed, stream) pairs give identical draws on any
// platform.  The per-stream engine is std::mt19937_64, whose sequence the
// C++ standard fixes exactly.  No std::*_distribution is used anywhere:
// their outputs are implementation-defined, so uniform doubles and discrete
// sampling are implemented below.

#include <cstdint>
#include <random>
#include <vector>

namespace walklab {

constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  // Stream `index` of the family keyed by `master`.
  static RngStream derive(std::uint64_t master, std::uint64_t index) {
    return RngStream(splitmix64(master + index * kSplitMixGamma));
  }

  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0,1) with 53 random bits; cannot return 1.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// Sample an index from a cumulative probability vector (last entry ~1).
// Plain linear scan: the walks here have a handful of atoms.
inline int sample_cdf(const std::vector<double>& cdf, double u) {
  int i = 0;
  const int n = static_cast<int>(cdf.size());
  while (i + 1 < n && u >= cdf[i]) ++i;
  return i;
}

}  // namespace walklab
