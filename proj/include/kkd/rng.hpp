#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kkd {

/// splitmix64 step; used to derive independent sub-streams from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d49bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic per-shot stream: results do not depend on execution order.
inline std::mt19937_64 shot_rng(std::uint64_t seed, std::uint64_t shot) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ (shot + 1)));
}

/// Named sub-stream (e.g. a calibration run derived from an experiment seed).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ h);
}

}  // namespace kkd
