#include "suggestive/rng.hpp"

#include <cmath>
#include <numbers>

namespace suggestive {

std::uint64_t SplitMix64::uniform_below(std::uint64_t bound) {
  // 2^64 mod bound, computed without 128-bit arithmetic.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

double SplitMix64::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace suggestive
