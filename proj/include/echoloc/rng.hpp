#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace echoloc {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent child seed for a named purpose ("dataset",
/// "sources", "kmeans", ...) from a root seed.
constexpr std::uint64_t split_seed(std::uint64_t root, std::string_view purpose) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(root ^ mix64(h));
}

constexpr std::uint64_t split_seed(std::uint64_t root, std::uint64_t index) {
  return mix64(root ^ mix64(index + 0x51ed270b27b1f0a3ULL));
}

}  // namespace echoloc
