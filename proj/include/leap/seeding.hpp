#pragma once

/**
 * Deterministic seeding utilities. All randomness in the engine flows from
 * explicit run seeds through these mixers; std:: distributions are avoided
 * because their output is implementation-defined.
 */

#include <cstdint>

namespace leap {

struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n), n >= 1, by rejection.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= bound);
    return static_cast<std::size_t>(v % n);
  }
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g{a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2))};
  return g.next();
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

/// Per-path generation seed derived from the run seed.
inline std::uint64_t path_seed(std::uint64_t run_seed, int path_id) {
  return mix_seed(run_seed, static_cast<std::uint64_t>(path_id));
}

}  // namespace leap
