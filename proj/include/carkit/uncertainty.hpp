#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "carkit/array.hpp"
#include "carkit/error.hpp"
#include "carkit/table.hpp"
#include "carkit/types.hpp"

namespace carkit {

enum class UncertaintyMethod {
  SEntr,
  OneMinusMCP,
  EDist,
  EDistAdaptive,
  EDistOrdinal,
  EnsembleVariance,
};

// Ordinal prefix labels rebuilt from the decode count c: Strict marks p < c,
// Literal marks p <= c.
enum class OrdinalLabelMode { Strict, Literal };

struct UncertaintyMap {
  std::vector<double> values;
  UncertaintyMethod method = UncertaintyMethod::SEntr;
};

inline UncertaintyMap shannon_entropy(const ProbMap& probs) {
  require_softmax(probs, "shannon_entropy");
  UncertaintyMap out;
  out.method = UncertaintyMethod::SEntr;
  out.values.resize(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    double h = 0.0;
    for (std::size_t p = 0; p < probs.data.cols; ++p) {
      const double y = probs.data(j, p);
      if (y > 0.0) h -= y * std::log(y);
    }
    out.values[j] = std::max(h, 0.0);
  }
  return out;
}

inline UncertaintyMap one_minus_mcp(const ProbMap& probs) {
  require_softmax(probs, "one_minus_mcp");
  UncertaintyMap out;
  out.method = UncertaintyMethod::OneMinusMCP;
  out.values.resize(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    double best = 0.0;
    for (std::size_t p = 0; p < probs.data.cols; ++p) best = std::max(best, probs.data(j, p));
    out.values[j] = 1.0 - best;
  }
  return out;
}

namespace detail {

inline void check_edist_inputs(const DepthTable& table, const ProbMap& probs,
                               const DepthMap& decoded, TableSpace expected, const char* what) {
  if (table.space != expected)
    throw Error(ErrorKind::SemanticsMismatch, std::string(what) + ": wrong table space");
  if (probs.data.cols != table.k())
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": probs columns != table bins");
  if (decoded.values.size() != probs.data.rows)
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": decoded length != probs rows");
}

}  // namespace detail

// Expectation of squared distance between each bin's depth (in meters) and the
// decoded depth, weighted by the classification map.
inline UncertaintyMap e_dist(const DepthTable& table, const ProbMap& probs,
                             const DepthMap& decoded) {
  require_softmax(probs, "e_dist");
  detail::check_edist_inputs(table, probs, decoded, TableSpace::LogCenters, "e_dist");
  UncertaintyMap out;
  out.method = UncertaintyMethod::EDist;
  out.values.resize(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < table.k(); ++p) {
      const double delta = std::exp(table.values[p]) - decoded.values[j];
      acc += probs.data(j, p) * delta * delta;
    }
    out.values[j] = acc;
  }
  return out;
}

// Adaptive-table branch: values are already meters, no exponentiation.
inline UncertaintyMap e_dist_adaptive(const DepthTable& table, const ProbMap& probs,
                                      const DepthMap& decoded) {
  require_softmax(probs, "e_dist_adaptive");
  detail::check_edist_inputs(table, probs, decoded, TableSpace::LinearAdaptive,
                             "e_dist_adaptive");
  UncertaintyMap out;
  out.method = UncertaintyMethod::EDistAdaptive;
  out.values.resize(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < table.k(); ++p) {
      const double delta = table.values[p] - decoded.values[j];
      acc += probs.data(j, p) * delta * delta;
    }
    out.values[j] = acc;
  }
  return out;
}

// E-Dist for the ordinal head. The decoded depth is re-discretized into prefix
// labels via the threshold count, and only classes at or above threshold
// contribute. Rebuilding the count from the probabilities avoids re-indexing
// the decoded depth, which lands exactly on a rounding boundary.
inline UncertaintyMap e_dist_ordinal(const DepthTable& table, const ProbMap& probs,
                                     const DepthMap& decoded,
                                     OrdinalLabelMode mode = OrdinalLabelMode::Strict) {
  require_sigmoid(probs, "e_dist_ordinal");
  detail::check_edist_inputs(table, probs, decoded, TableSpace::LogCenters, "e_dist_ordinal");
  UncertaintyMap out;
  out.method = UncertaintyMethod::EDistOrdinal;
  out.values.resize(probs.data.rows);
  for (std::size_t j = 0; j < probs.data.rows; ++j) {
    std::size_t count = 0;
    for (std::size_t p = 0; p < table.k(); ++p) count += (probs.data(j, p) >= 0.5);
    double acc = 0.0;
    for (std::size_t p = 0; p < table.k(); ++p) {
      const double y = probs.data(j, p);
      if (y < 0.5) continue;
      const double label = (mode == OrdinalLabelMode::Strict ? p < count : p <= count) ? 1.0 : 0.0;
      const double delta = label - y;
      acc += std::exp(table.values[p]) * delta * delta;
    }
    out.values[j] = acc;
  }
  return out;
}

// Per-pixel population variance across M depth maps with identical masks.
inline UncertaintyMap ensemble_variance(const std::vector<DepthMap>& maps) {
  if (maps.size() < 2)
    throw Error(ErrorKind::TooFewMembers, "ensemble variance needs at least 2 maps");
  const std::size_t n = maps[0].values.size();
  for (const auto& m : maps) {
    if (m.values.size() != n)
      throw Error(ErrorKind::ShapeMismatch, "ensemble members differ in length");
    if (m.mask != maps[0].mask) throw Error(ErrorKind::MaskMismatch, "ensemble masks differ");
  }
  const double inv_m = 1.0 / static_cast<double>(maps.size());
  UncertaintyMap out;
  out.method = UncertaintyMethod::EnsembleVariance;
  out.values.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!maps[0].mask[j]) continue;
    double mean = 0.0;
    for (const auto& m : maps) mean += m.values[j];
    mean *= inv_m;
    double var = 0.0;
    for (const auto& m : maps) {
      const double d = m.values[j] - mean;
      var += d * d;
    }
    out.values[j] = var * inv_m;
  }
  return out;
}

}  // namespace carkit
