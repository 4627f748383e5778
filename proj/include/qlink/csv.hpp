#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace qlink {

// Shortest round-trip decimal form, locale-independent (std::to_chars).
inline std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  return std::string(buf, 16);
}

}  // namespace qlink
