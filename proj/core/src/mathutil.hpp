#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Numeric helpers shared across modules. The uniform draws avoid the
// implementation-defined std distributions so fixed seeds reproduce across
// standard libraries.
namespace relimp::mathutil {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform in [0, 1): top 53 bits of the engine output.
inline double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

// Unbiased draw in [0, n), n >= 1, by modulo rejection.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  std::uint64_t x, r;
  do {
    x = rng();
    r = x % n;
  } while (x - r > std::uint64_t(-1) - (n - 1));
  return r;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double clamp01(double v) {
  return std::min(1.0, std::max(0.0, v));
}

}  // namespace relimp::mathutil
