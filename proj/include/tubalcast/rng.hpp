#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tubalcast {

using Rng = std::mt19937_64;

/// FNV-1a over raw bytes. Stable across platforms, used for stream names and
/// parameter fingerprints.
constexpr std::uint64_t fnv1a(const void* data, std::size_t len,
                              std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the named sub-stream `stream` of the master `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                                 std::uint64_t index = 0) noexcept {
  return splitmix64(fnv1a(stream.data(), stream.size()) ^ splitmix64(seed) ^
                    splitmix64(index + 0x51ed270b27a6f1c3ULL));
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace tubalcast
