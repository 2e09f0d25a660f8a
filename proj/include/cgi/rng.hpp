#pragma once

#include <cmath>
#include <cstdint>

namespace cgi::rng {

/// Name of the counter-based generator, recorded in pattern file headers so
/// other implementations can reproduce streams bit-exactly.
inline constexpr const char* kGeneratorName = "splitmix64-counter-v1";

// Domain tags keep the pattern stream and the channel-noise stream
// decorrelated even when the two seeds happen to be equal.
inline constexpr uint64_t kDomainBernoulli = 0x9f4a7c15'b5297a4dULL;
inline constexpr uint64_t kDomainShuffle = 0x27d4eb2f'165667c5ULL;
inline constexpr uint64_t kDomainGain = 0x85ebca6b'c2b2ae35ULL;
inline constexpr uint64_t kDomainBackground = 0xc4ceb9fe'1a85ec53ULL;
inline constexpr uint64_t kDomainDetector = 0xff51afd7'ed558ccdULL;

/// SplitMix64 finalizer: a full-avalanche 64-bit mix.
inline constexpr uint64_t mix(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Pure function (seed, domain, frame, counter) -> 64-bit word. Random access
/// in every argument; no state is carried between calls.
inline constexpr uint64_t word_at(uint64_t seed, uint64_t domain, uint64_t frame,
                                  uint64_t counter) {
  return mix(mix(mix(seed ^ domain) + frame) + counter);
}

/// Uniform double in [0, 1) from a 64-bit word (53 mantissa bits).
inline double to_unit(uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

/// Standard normal draw keyed by (seed, domain, frame); Box-Muller on two
/// counter words, so the value does not depend on evaluation order.
inline double normal_at(uint64_t seed, uint64_t domain, uint64_t frame) {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = (static_cast<double>(word_at(seed, domain, frame, 0) >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = to_unit(word_at(seed, domain, frame, 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

}  // namespace cgi::rng
