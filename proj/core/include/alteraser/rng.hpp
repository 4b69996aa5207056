#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

// Seeded randomness helpers. std::mt19937_64 output is fully specified by the
// standard; the draw/shuffle/sample routines below avoid the distribution
// classes (whose algorithms are implementation-defined) so that every seeded
// result is reproducible across toolchains.
namespace alteraser::rng {

using Engine = std::mt19937_64;

/// Unbiased draw from [0, n). n must be >= 1.
inline std::uint64_t bounded(Engine& eng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = eng();
    if (x >= threshold) return x % n;
  }
}

/// Uniform double in [0, 1).
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one value per call).
inline double normal(Engine& eng) {
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(eng, i)]);
  }
}

/// k distinct values sampled uniformly from `pool`, returned sorted.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k, Engine& eng) {
  // Partial Fisher-Yates: after i swaps the first i entries are the sample.
  for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
    std::swap(pool[i], pool[i + bounded(eng, pool.size() - i)]);
  }
  pool.resize(std::min(k, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace alteraser::rng
