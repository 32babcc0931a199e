#ifndef CFKIT_RANDOM_HPP_
#define CFKIT_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace cfkit {

// All randomness in the library goes through these helpers. std::mt19937_64
// has a standardized output sequence; std::uniform_*_distribution and
// std::shuffle have implementation-defined draw counts, which would break
// bit-for-bit reproducibility across standard libraries.
using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) with 53 random bits.
inline double unit_real(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform draw in [0, n). n must be positive.
inline std::size_t bounded(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
}

/// Fisher-Yates with explicit bounded draws.
template <typename T>
void seeded_shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = bounded(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace cfkit

#endif  // CFKIT_RANDOM_HPP_
