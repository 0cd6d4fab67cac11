#pragma once

#include <cstdint>
#include <random>

namespace oodcl::rng {

using Engine = std::mt19937_64;

// splitmix64 finalizer; decorrelates nearby seeds before they feed an engine.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
  return mix(mix(seed) ^ salt);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t salt_a,
                            std::uint64_t salt_b) {
  return mix(derive(seed, salt_a) ^ mix(salt_b));
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t salt) {
  return Engine(derive(seed, salt));
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t salt_a,
                          std::uint64_t salt_b) {
  return Engine(derive(seed, salt_a, salt_b));
}

// Stream salts used across the library; kept in one place so that training
// phases that must replay identical randomness share a stream by value.
namespace salt {
inline constexpr std::uint64_t kInitWeights = 0x01;
inline constexpr std::uint64_t kInitPrototypes = 0x02;
inline constexpr std::uint64_t kShuffle = 0x10;
inline constexpr std::uint64_t kAugment = 0x11;
inline constexpr std::uint64_t kOodDraw = 0x12;
inline constexpr std::uint64_t kMixup = 0x13;
inline constexpr std::uint64_t kMeans = 0x20;
inline constexpr std::uint64_t kSamples = 0x21;
inline constexpr std::uint64_t kTestSamples = 0x22;
inline constexpr std::uint64_t kOodData = 0x23;
}  // namespace salt

}  // namespace oodcl::rng
