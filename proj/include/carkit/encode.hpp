#pragma once

#include <cmath>
#include <cstddef>

#include "carkit/array.hpp"
#include "carkit/error.hpp"
#include "carkit/table.hpp"
#include "carkit/types.hpp"

namespace carkit {

enum class LabelKind { OneHot, Ordinal, Smooth1, Smooth2, Smooth3 };

// Ordinal prefix rule. Literal marks classes p <= k; Strict marks p < k,
// which is the variant consistent with the ordinal-sum decoder.
enum class OrdinalEncodeMode { Literal, Strict };

// Per-pixel classification targets. Masked-out pixels get all-zero rows.
struct LabelMap {
  Matrix data;
  LabelKind kind = LabelKind::OneHot;
  double gamma = 0.0;  // Smooth kinds only
};

namespace detail {

inline void check_encode_inputs(const GroundTruthDepth& gt, const DepthTable& table,
                                const char* what) {
  if (table.space != TableSpace::LogCenters)
    throw Error(ErrorKind::SemanticsMismatch, std::string(what) + " needs a LogCenters table");
  validate_ground_truth(gt);
}

}  // namespace detail

inline LabelMap encode_onehot(const GroundTruthDepth& gt, const DepthTable& table,
                              IndexMode mode = IndexMode::NearestEdge) {
  detail::check_encode_inputs(gt, table, "encode_onehot");
  LabelMap out;
  out.kind = LabelKind::OneHot;
  out.data = Matrix(gt.size(), table.k());
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (!gt.mask[j]) continue;
    out.data(j, class_index(table, gt.values[j], mode)) = 1.0;
  }
  return out;
}

inline LabelMap encode_ordinal(const GroundTruthDepth& gt, const DepthTable& table,
                               OrdinalEncodeMode ord = OrdinalEncodeMode::Literal,
                               IndexMode mode = IndexMode::NearestEdge) {
  detail::check_encode_inputs(gt, table, "encode_ordinal");
  LabelMap out;
  out.kind = LabelKind::Ordinal;
  out.data = Matrix(gt.size(), table.k());
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (!gt.mask[j]) continue;
    const std::size_t k = class_index(table, gt.values[j], mode);
    const std::size_t ones = ord == OrdinalEncodeMode::Literal ? k + 1 : k;
    for (std::size_t p = 0; p < ones; ++p) out.data(j, p) = 1.0;
  }
  return out;
}

// Gaussian kernel over log-depth distance to each bin center, unnormalized.
inline LabelMap encode_smooth1(const GroundTruthDepth& gt, const DepthTable& table,
                               double gamma) {
  detail::check_encode_inputs(gt, table, "encode_smooth1");
  if (!(gamma > 0.0)) throw Error(ErrorKind::BadConfig, "gamma must be > 0");
  LabelMap out;
  out.kind = LabelKind::Smooth1;
  out.gamma = gamma;
  out.data = Matrix(gt.size(), table.k());
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (!gt.mask[j]) continue;
    const double ld = std::log(gt.values[j]);
    for (std::size_t p = 0; p < table.k(); ++p) {
      const double delta = ld - table.values[p];
      out.data(j, p) = std::exp(-gamma * delta * delta);
    }
  }
  return out;
}

// Smooth1 row divided by its sum, so rows are distributions.
inline LabelMap encode_smooth2(const GroundTruthDepth& gt, const DepthTable& table,
                               double gamma) {
  LabelMap out = encode_smooth1(gt, table, gamma);
  out.kind = LabelKind::Smooth2;
  for (std::size_t j = 0; j < out.data.rows; ++j) {
    if (!gt.mask[j]) continue;
    auto row = out.data.row(j);
    const double total = chunked_sum(row);
    for (auto& x : row) x /= total;
  }
  return out;
}

// Gaussian kernel in index space around the one-hot class.
inline LabelMap encode_smooth3(const GroundTruthDepth& gt, const DepthTable& table,
                               double gamma, IndexMode mode = IndexMode::NearestEdge) {
  detail::check_encode_inputs(gt, table, "encode_smooth3");
  if (!(gamma > 0.0)) throw Error(ErrorKind::BadConfig, "gamma must be > 0");
  LabelMap out;
  out.kind = LabelKind::Smooth3;
  out.gamma = gamma;
  out.data = Matrix(gt.size(), table.k());
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (!gt.mask[j]) continue;
    const double k = static_cast<double>(class_index(table, gt.values[j], mode));
    for (std::size_t p = 0; p < table.k(); ++p) {
      const double delta = k - static_cast<double>(p);
      out.data(j, p) = std::exp(-gamma * delta * delta);
    }
  }
  return out;
}

}  // namespace carkit
