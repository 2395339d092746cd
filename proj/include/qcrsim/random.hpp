#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qcrsim {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named sub-stream of a root seed: every stage and every chunk inside a stage
// draws from derive_seed(root, stage, chunk), so results do not depend on the
// order stages run in or on how chunks are spread over workers.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(root ^ h) + index);
}

}  // namespace qcrsim
