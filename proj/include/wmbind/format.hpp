#pragma once

#include <charconv>
#include <string>

namespace wmbind {

/// Shortest decimal form of a double that parses back to the same bits.
inline std::string format_real(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace wmbind
