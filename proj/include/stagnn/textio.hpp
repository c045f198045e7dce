#pragma once

#include <charconv>
#include <string>

namespace stagnn {

// Shortest representation that parses back to the identical double. All
// numeric file output goes through this so artifacts are byte-stable and
// usable for bitwise regression comparisons.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace stagnn
