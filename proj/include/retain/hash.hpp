#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace retain {

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
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

// Stable short id: prefix + 16 hex digits of the content hash.
inline std::string stable_id(std::string_view prefix, std::string_view content) {
  return std::string(prefix) + hex64(fnv1a64(content));
}

}  // namespace retain
