#pragma once

#include <cstdint>
#include <limits>

namespace suggestive {

// SplitMix64 (Steele, Lea & Flood, 2014): state += 0x9E3779B97F4A7C15, then
// the output is the state passed through the mix64 finalizer
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z =  z ^ (z >> 31)
// All derived draws below are defined in terms of next() only, so streams are
// identical on every platform and easy to reproduce in other languages.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform integer in [0, bound). Rejection sampling over the largest
  // multiple of bound, so there is no modulo bias. bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (cosine branch only, one normal per two
  // uniforms, no cached spare).
  double normal();

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Deterministic seed for an independent sub-stream, e.g. (seed, member, image).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = SplitMix64::mix(seed + 0x9E3779B97F4A7C15ULL);
  h = SplitMix64::mix(h ^ (a + 0x632BE59BD9B4E019ULL));
  return SplitMix64::mix(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
}

}  // namespace suggestive
