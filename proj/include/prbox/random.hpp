// Deterministic RNG utilities. The std distributions are implementation
// defined, so scans roll their own uniforms to keep reports byte-identical
// across toolchains.

#pragma once

#include <cstdint>

namespace prbox {

struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1) with 53 bits
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }
};

// Stable per-sample seed derivation: scans stay identical no matter how the
// sample loop is chunked over threads.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed ^ (0xd1342543de82ef95ULL * (index + 1)));
  return g.next();
}

}  // namespace prbox
