#ifndef TRIVOTE_RANDOM_HPP
#define TRIVOTE_RANDOM_HPP

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace trivote {

// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not. These helpers draw straight from the engine so that
// seeded runs agree across standard library implementations.
using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

}  // namespace trivote

#endif  // TRIVOTE_RANDOM_HPP
