#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "carkit/error.hpp"

namespace carkit {

// Row-major dense matrix of doubles. Rows index pixels, columns index classes.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Per-pixel validity. 1 = valid, 0 = ignore.
using Mask = std::vector<std::uint8_t>;

inline Mask full_mask(std::size_t n) { return Mask(n, 1); }

inline std::size_t count_valid(const Mask& mask) {
  std::size_t n = 0;
  for (auto m : mask) n += (m != 0);
  return n;
}

// Fixed-order chunked summation: sum 4096-element chunks sequentially, then
// combine the chunk sums in order. Every reduction in the toolkit goes through
// this so results do not depend on how work is split across threads.
inline constexpr std::size_t kSumChunk = 4096;

inline double chunked_sum(std::span<const double> xs) {
  double total = 0.0;
  for (std::size_t start = 0; start < xs.size(); start += kSumChunk) {
    const std::size_t end = std::min(start + kSumChunk, xs.size());
    double part = 0.0;
    for (std::size_t i = start; i < end; ++i) part += xs[i];
    total += part;
  }
  return total;
}

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m.data)) throw Error(ErrorKind::NonFinite, std::string(what) + " contains NaN or Inf");
}

}  // namespace carkit
