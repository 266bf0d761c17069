#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace graphkrig {

// mt19937_64 output is fixed by the standard, unlike the std distributions,
// so these helpers keep splits and shuffles identical across toolchains.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = Rng::max() - Rng::max() % bound;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % bound;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) { return double(rng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = std::size_t(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace graphkrig
