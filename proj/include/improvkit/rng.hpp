#pragma once

#include <cstdint>
#include <random>

namespace improvkit {

// splitmix64 finalizer; used to derive independent sub-seeds from a run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sub-seed for stream `stream` of run seed `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

namespace streams {
constexpr std::uint64_t kData = 1;
constexpr std::uint64_t kSplit = 2;
constexpr std::uint64_t kInit = 3;
constexpr std::uint64_t kShuffle = 4;
constexpr std::uint64_t kPgd = 5;
constexpr std::uint64_t kFolds = 6;
}  // namespace streams

using Rng = std::mt19937_64;

}  // namespace improvkit
