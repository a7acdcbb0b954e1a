#include "cofine/rng.hpp"

#include <cmath>

#include "cofine/errors.hpp"

namespace cofine::rng {

namespace {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t state = a;
  std::uint64_t out = splitmix64_next(state);
  state ^= b + 0x9e3779b97f4a7c15ULL;
  out ^= splitmix64_next(state);
  state ^= c + 0xbf58476d1ce4e5b9ULL;
  out ^= splitmix64_next(state);
  return out;
}

double Stream::uniform01() {
  // 53 high bits -> [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Stream::normal() {
  // Box-Muller; u1 bounded away from 0 so the log is finite.
  double u1 = uniform01();
  double u2 = uniform01();
  if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

RealVector Stream::gaussian_vector(int n) {
  RealVector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

RealVector Stream::on_unit_sphere(int n) {
  if (n <= 0) throw DimensionMismatch("on_unit_sphere: dimension must be positive");
  for (int attempt = 0; attempt < 64; ++attempt) {
    RealVector v = gaussian_vector(n);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
  throw Error("on_unit_sphere: degenerate draws");
}

}  // namespace cofine::rng
