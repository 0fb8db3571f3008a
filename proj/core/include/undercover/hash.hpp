#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace undercover {

/// 64-bit FNV-1a. Stable across platforms and runs; used for digests and
/// request keys, never for security.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

std::string to_hex(std::uint64_t value);

inline std::string digest_hex(std::string_view data) {
  return to_hex(fnv1a64(data));
}

}  // namespace undercover
