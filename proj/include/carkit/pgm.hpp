#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "carkit/error.hpp"

namespace carkit {

// 16-bit binary PGM (P5, maxval 65535, big-endian samples) for quick visual
// inspection of depth and uncertainty maps.
inline void write_pgm16(const std::string& path, const std::vector<double>& values,
                        std::size_t width, double lo, double hi) {
  if (width == 0 || values.size() % width != 0)
    throw Error(ErrorKind::ShapeMismatch, "pgm width must divide the pixel count");
  const std::size_t height = values.size() / width;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  os << "P5\n" << width << " " << height << "\n65535\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (double v : values) {
    const double t = std::clamp((v - lo) / span, 0.0, 1.0);
    const auto s = static_cast<std::uint16_t>(t * 65535.0 + 0.5);
    os.put(static_cast<char>(s >> 8));
    os.put(static_cast<char>(s & 0xFF));
  }
  if (!os) throw Error(ErrorKind::IoError, "pgm write failed");
}

// Normalizes to the map's own [min, max] before quantizing.
inline void write_pgm16_normalized(const std::string& path, const std::vector<double>& values,
                                   std::size_t width) {
  double lo = values.empty() ? 0.0 : values[0];
  double hi = lo;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  write_pgm16(path, values, width, lo, hi);
}

}  // namespace carkit
