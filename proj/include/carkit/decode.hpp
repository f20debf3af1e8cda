#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "carkit/array.hpp"
#include "carkit/error.hpp"
#include "carkit/table.hpp"
#include "carkit/types.hpp"

namespace carkit {

// Count handling for the ordinal-sum decoder. A literal count of K (every
// class past threshold) indexes one past the table; Clamped caps it at K-1.
enum class OrdinalCountMode { Clamped, Literal };

namespace detail {

inline void check_decode_inputs(const DepthTable& table, const ProbMap& probs,
                                TableSpace expected, const char* what) {
  if (table.space != expected)
    throw Error(ErrorKind::SemanticsMismatch, std::string(what) + ": wrong table space");
  if (probs.data.cols != table.k())
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": probs columns != table bins");
}

}  // namespace detail

// Probability-weighted sum of log centers, exponentiated back to meters.
inline DepthMap decode_soft_weighted(const DepthTable& table, const ProbMap& probs) {
  require_softmax(probs, "decode_soft_weighted");
  detail::check_decode_inputs(table, probs, TableSpace::LogCenters, "decode_soft_weighted");
  DepthMap out;
  out.values.resize(probs.data.rows);
  out.mask = full_mask(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < table.k(); ++p) acc += table.values[p] * probs.data(j, p);
    out.values[j] = std::exp(acc);
  }
  return out;
}

// Depth of the most probable bin. Ties break to the lowest index.
inline DepthMap decode_argmax(const DepthTable& table, const ProbMap& probs) {
  detail::check_decode_inputs(table, probs, TableSpace::LogCenters, "decode_argmax");
  DepthMap out;
  out.values.resize(probs.data.rows);
  out.mask = full_mask(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < table.k(); ++p)
      if (probs.data(j, p) > probs.data(j, best)) best = p;
    out.values[j] = std::exp(table.values[best]);
  }
  return out;
}

// Ordinal sum: count sigmoid outputs at or above 0.5 and read the depth at
// that count.
inline DepthMap decode_ordinal(const DepthTable& table, const ProbMap& probs,
                               OrdinalCountMode mode = OrdinalCountMode::Clamped) {
  require_sigmoid(probs, "decode_ordinal");
  detail::check_decode_inputs(table, probs, TableSpace::LogCenters, "decode_ordinal");
  const double log_a = std::log(table.range.a);
  DepthMap out;
  out.values.resize(probs.data.rows);
  out.mask = full_mask(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    std::size_t count = 0;
    for (std::size_t p = 0; p < table.k(); ++p) count += (probs.data(j, p) >= 0.5);
    if (mode == OrdinalCountMode::Clamped) count = std::min(count, table.k() - 1);
    out.values[j] = std::exp(log_a + (static_cast<double>(count) + 0.5) * table.q);
  }
  return out;
}

// Probability-weighted sum of adaptive-table depths, already in meters.
inline DepthMap decode_adaptive(const DepthTable& table, const ProbMap& probs) {
  require_softmax(probs, "decode_adaptive");
  detail::check_decode_inputs(table, probs, TableSpace::LinearAdaptive, "decode_adaptive");
  DepthMap out;
  out.values.resize(probs.data.rows);
  out.mask = full_mask(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < table.k(); ++p) acc += table.values[p] * probs.data(j, p);
    out.values[j] = acc;
  }
  return out;
}

}  // namespace carkit
