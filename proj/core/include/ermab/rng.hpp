#pragma once

#include <cstdint>
#include <random>

namespace ermab {

/// Independent random sub-streams derived from one root seed. Each purpose
/// gets its own stream so that, e.g., a policy drawing random numbers never
/// shifts the transition samples of the same episode.
enum class StreamPurpose : std::uint64_t {
  Transition = 1,
  Policy = 2,
  Upsample = 3,
  DomainBuild = 4,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, StreamPurpose purpose,
                                    std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
  std::uint64_t h = mix64(root);
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ a);
  return mix64(h ^ (b * 0x632be59bd9b4e019ULL));
}

/// A uniform double in [0, 1) from 53 random bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline std::mt19937_64 make_stream(std::uint64_t root, StreamPurpose purpose,
                                   std::uint64_t a = 0) {
  return std::mt19937_64(derive_seed(root, purpose, a));
}

/// Counter-based uniform for the transition of `arm` at round `t`: the sample
/// depends only on (root, arm, t).
constexpr double transition_uniform(std::uint64_t root, std::uint64_t arm, std::uint64_t t) noexcept {
  return to_unit(derive_seed(root, StreamPurpose::Transition, arm, t + 1));
}

}  // namespace ermab
