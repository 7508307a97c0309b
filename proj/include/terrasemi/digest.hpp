#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace terrasemi {

/// 64-bit FNV-1a. Used for content digests (manifests, the strong table) and
/// for keying per-sample RNG streams by sample id. Not a cryptographic hash.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return std::string(buf, 16);
}

}  // namespace terrasemi
