#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wvm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// All randomness flows from one root seed through (root, stage label, index).
// Every parallel work item derives its own seed, so results do not depend on
// the schedule.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(root);
  for (char c : label) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  }
  return splitmix64(h ^ index);
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view label,
                                std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(root, label, index));
}

}  // namespace wvm
