#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace ngcp {

/// 64-bit FNV-1a. Used for digests and the abstract key derivation; not a
/// cryptographic primitive.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string fnv_hex(std::string_view s) { return hex64(fnv1a(s)); }

}  // namespace ngcp
