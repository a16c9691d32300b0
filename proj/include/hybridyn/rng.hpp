#pragma once

#include <cstdint>
#include <random>

namespace hybridyn {

// mt19937_64 output is specified bit-for-bit by the standard; the [0,1)
// mapping below avoids std::uniform_real_distribution, whose stream is
// implementation-defined. Ensembles derive run k's seed as seed + k.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform() { return (eng() >> 11) * 0x1.0p-53; }
};

}  // namespace hybridyn
