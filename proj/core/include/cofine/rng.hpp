#pragma once

#include <cstdint>
#include <random>

#include "cofine/types.hpp"

namespace cofine::rng {

// Mixes seed material into a well-spread 64-bit value (splitmix64 finalizer).
std::uint64_t mix(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Deterministic random stream. All draws go through hand-rolled transforms
// (never std::*_distribution, whose output is implementation-defined), so a
// given (seed, tag, index) replays bit-identically on any conforming stdlib.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0)
      : engine_(mix(seed, tag, index)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller.
  double normal();

  RealVector gaussian_vector(int n);
  // Uniform direction on the unit sphere in R^n.
  RealVector on_unit_sphere(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cofine::rng
