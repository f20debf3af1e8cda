#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "carkit/error.hpp"

namespace carkit {

struct DepthRange {
  double a = 0.0;  // minimum depth, meters
  double b = 0.0;  // maximum depth, meters
};

enum class TableSpace { LogCenters, LinearAdaptive };

// Ordered list of K quantized depth values. For LogCenters the values are
// log-depths (centers of uniform log-space intervals); for LinearAdaptive
// they are depths in meters produced by a cumulative width sum.
struct DepthTable {
  TableSpace space = TableSpace::LogCenters;
  std::vector<double> values;
  DepthRange range;
  double q = 0.0;  // log-space bin width, LogCenters only

  std::size_t k() const { return values.size(); }
};

// Nonnegative per-bin widths summing to 1.
struct WidthVector {
  std::vector<double> widths;
};

// How a continuous depth is mapped to a class index.
//   NearestEdge: k = round(log(d/a)/q), rounding half away from zero.
//   IntervalFloor: k = floor(log(d/a)/q), membership in [edge_k, edge_{k+1}).
enum class IndexMode { NearestEdge, IntervalFloor };

inline DepthTable make_uniform_log_table(const DepthRange& range, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::ZeroBins, "bin count must be positive");
  if (range.a <= 0.0) throw Error(ErrorKind::NonPositiveMin, "log table needs a > 0");
  if (!(range.a < range.b)) throw Error(ErrorKind::BadRange, "need a < b");

  DepthTable t;
  t.space = TableSpace::LogCenters;
  t.range = range;
  const double log_a = std::log(range.a);
  const double log_b = std::log(range.b);
  t.q = (log_b - log_a) / static_cast<double>(k);
  t.values.resize(k);
  for (std::size_t p = 0; p < k; ++p)
    t.values[p] = log_a + (static_cast<double>(p) + 0.5) * t.q;
  return t;
}

// widths[p] = (max(raw[p], 0) + eps) / sum over all bins, renormalized so the
// result sums to exactly 1. The additive eps floor keeps every bin nonempty.
inline WidthVector normalize_widths(const std::vector<double>& raw, double eps = 1e-3) {
  if (raw.empty()) throw Error(ErrorKind::ZeroBins, "width vector must be nonempty");
  if (eps < 0.0) throw Error(ErrorKind::BadConfig, "eps must be nonnegative");

  WidthVector w;
  w.widths.resize(raw.size());
  double total = 0.0;
  for (std::size_t p = 0; p < raw.size(); ++p) {
    w.widths[p] = std::max(raw[p], 0.0) + eps;
    total += w.widths[p];
  }
  if (total <= 0.0)
    throw Error(ErrorKind::DegenerateWidths, "all widths nonpositive and eps = 0");
  for (auto& x : w.widths) x /= total;
  return w;
}

inline DepthTable make_adaptive_table(const DepthRange& range, const WidthVector& widths) {
  if (!(range.a < range.b)) throw Error(ErrorKind::BadRange, "need a < b");
  if (widths.widths.empty()) throw Error(ErrorKind::ZeroBins, "width vector must be nonempty");

  DepthTable t;
  t.space = TableSpace::LinearAdaptive;
  t.range = range;
  t.values.resize(widths.widths.size());
  double cum = 0.0;
  for (std::size_t p = 0; p < widths.widths.size(); ++p) {
    cum += widths.widths[p];
    t.values[p] = range.a + (range.b - range.a) * cum;
  }
  return t;
}

// Class index for a depth under a LogCenters table. The input is clamped to
// [a, b] before indexing and the index is clamped to [0, K-1], so any d > 0
// maps to a class.
inline std::size_t class_index(const DepthTable& table, double d,
                               IndexMode mode = IndexMode::NearestEdge) {
  if (table.space != TableSpace::LogCenters)
    throw Error(ErrorKind::SemanticsMismatch, "class_index needs a LogCenters table");
  if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDepth, "depth must be > 0");

  const double clamped = std::clamp(d, table.range.a, table.range.b);
  const double x = std::log(clamped / table.range.a) / table.q;
  long long k;
  if (mode == IndexMode::NearestEdge) {
    k = std::llround(x);  // rounds half away from zero
  } else {
    k = static_cast<long long>(std::floor(x));
  }
  k = std::clamp<long long>(k, 0, static_cast<long long>(table.k()) - 1);
  return static_cast<std::size_t>(k);
}

// --- JSON interchange -------------------------------------------------------
//
// {space, a, b, k, q?, values[]}. nlohmann::json emits shortest round-trip
// decimals, so values survive a write/read cycle bit-exactly.

inline nlohmann::json table_to_json(const DepthTable& t) {
  nlohmann::json j;
  j["space"] = t.space == TableSpace::LogCenters ? "log_centers" : "linear_adaptive";
  j["a"] = t.range.a;
  j["b"] = t.range.b;
  j["k"] = t.k();
  if (t.space == TableSpace::LogCenters) j["q"] = t.q;
  j["values"] = t.values;
  return j;
}

inline DepthTable table_from_json(const nlohmann::json& j) {
  DepthTable t;
  const std::string space = j.at("space").get<std::string>();
  if (space == "log_centers") {
    t.space = TableSpace::LogCenters;
  } else if (space == "linear_adaptive") {
    t.space = TableSpace::LinearAdaptive;
  } else {
    throw Error(ErrorKind::BadConfig, "unknown table space '" + space + "'");
  }
  t.range.a = j.at("a").get<double>();
  t.range.b = j.at("b").get<double>();
  t.values = j.at("values").get<std::vector<double>>();
  const auto k = j.at("k").get<std::size_t>();
  if (k != t.values.size())
    throw Error(ErrorKind::ShapeMismatch, "table k does not match values length");
  if (k == 0) throw Error(ErrorKind::ZeroBins, "table has no bins");
  if (!(t.range.a < t.range.b)) throw Error(ErrorKind::BadRange, "need a < b");
  for (std::size_t p = 1; p < k; ++p)
    if (!(t.values[p - 1] < t.values[p]))
      throw Error(ErrorKind::BadConfig, "table values must be strictly increasing");

  if (t.space == TableSpace::LogCenters) {
    if (t.range.a <= 0.0) throw Error(ErrorKind::NonPositiveMin, "log table needs a > 0");
    t.q = j.at("q").get<double>();
    const double log_a = std::log(t.range.a);
    for (std::size_t p = 0; p < k; ++p) {
      const double expect = log_a + (static_cast<double>(p) + 0.5) * t.q;
      if (std::abs(t.values[p] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
        throw Error(ErrorKind::BadConfig, "log table values inconsistent with a, q");
    }
  } else {
    for (double v : t.values)
      if (v < t.range.a - 1e-9 || v > t.range.b + 1e-9)
        throw Error(ErrorKind::BadConfig, "adaptive table value outside [a, b]");
    if (std::abs(t.values.back() - t.range.b) > 1e-9)
      throw Error(ErrorKind::BadConfig, "adaptive table must end at b");
  }
  return t;
}

}  // namespace carkit
