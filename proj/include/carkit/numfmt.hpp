#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace carkit {

// Shortest decimal string that parses back to the same double. Used for all
// machine-readable file output so round trips are bit-exact.
inline std::string to_shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// Human-facing fixed format with six digits after the decimal point.
inline std::string to_fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

}  // namespace carkit
