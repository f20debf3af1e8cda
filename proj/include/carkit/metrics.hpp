#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "carkit/array.hpp"
#include "carkit/error.hpp"
#include "carkit/types.hpp"
#include "carkit/uncertainty.hpp"

namespace carkit {

struct DepthMetrics {
  double rmse = 0.0;
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse_log = 0.0;
  double log10 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t n_valid = 0;
};

enum class MetricKind { RMSE, AbsRel };

struct SparsificationCurve {
  std::vector<double> fractions;
  std::vector<double> metric_values;
  MetricKind metric_kind = MetricKind::RMSE;
};

namespace detail {

inline std::size_t check_pred_gt(const DepthMap& pred, const GroundTruthDepth& gt) {
  validate_ground_truth(gt);
  if (pred.values.size() != gt.values.size())
    throw Error(ErrorKind::ShapeMismatch, "prediction and ground truth differ in length");
  if (pred.mask != gt.mask) throw Error(ErrorKind::MaskMismatch, "masks differ");
  const std::size_t n_valid = count_valid(gt.mask);
  if (n_valid == 0) throw Error(ErrorKind::EmptyMask, "no valid pixels");
  return n_valid;
}

}  // namespace detail

inline DepthMetrics depth_metrics(const DepthMap& pred, const GroundTruthDepth& gt) {
  const std::size_t n_valid = detail::check_pred_gt(pred, gt);
  const double n = static_cast<double>(n_valid);

  std::vector<double> sq, abs_rel, sq_rel, log_sq, l10;
  sq.reserve(n_valid);
  abs_rel.reserve(n_valid);
  sq_rel.reserve(n_valid);
  log_sq.reserve(n_valid);
  l10.reserve(n_valid);
  std::size_t in1 = 0, in2 = 0, in3 = 0;
  const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;

  for (std::size_t j = 0; j < pred.values.size(); ++j) {
    if (!gt.mask[j]) continue;
    const double d = gt.values[j];
    const double dh = pred.values[j];
    if (!(dh > 0.0)) throw Error(ErrorKind::NonPositiveDepth, "predicted depth must be > 0");
    const double err = dh - d;
    sq.push_back(err * err);
    abs_rel.push_back(std::abs(err) / d);
    sq_rel.push_back(err * err / d);
    const double dl = std::log(dh) - std::log(d);
    log_sq.push_back(dl * dl);
    l10.push_back(std::abs(std::log10(dh) - std::log10(d)));
    const double ratio = std::max(dh / d, d / dh);
    in1 += (ratio < t1);
    in2 += (ratio < t2);
    in3 += (ratio < t3);
  }

  DepthMetrics m;
  m.rmse = std::sqrt(chunked_sum(sq) / n);
  m.abs_rel = chunked_sum(abs_rel) / n;
  m.sq_rel = chunked_sum(sq_rel) / n;
  m.rmse_log = std::sqrt(chunked_sum(log_sq) / n);
  m.log10 = chunked_sum(l10) / n;
  m.delta1 = static_cast<double>(in1) / n;
  m.delta2 = static_cast<double>(in2) / n;
  m.delta3 = static_cast<double>(in3) / n;
  m.n_valid = n_valid;
  return m;
}

// Per-pixel error used both as the sparsification metric input and as the
// oracle ranking: absolute error for RMSE, relative error for AbsRel.
inline std::vector<double> oracle_ranking(const DepthMap& pred, const GroundTruthDepth& gt,
                                          MetricKind kind) {
  detail::check_pred_gt(pred, gt);
  std::vector<double> out;
  out.reserve(count_valid(gt.mask));
  for (std::size_t j = 0; j < pred.values.size(); ++j) {
    if (!gt.mask[j]) continue;
    const double e = std::abs(pred.values[j] - gt.values[j]);
    out.push_back(kind == MetricKind::RMSE ? e : e / gt.values[j]);
  }
  return out;
}

namespace detail {

// Pixels ordered by descending ranking value; equal values keep ascending
// pixel index so the removal order is deterministic.
inline std::vector<std::size_t> removal_order(const std::vector<double>& ranking) {
  std::vector<std::size_t> order(ranking.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranking[a] > ranking[b]; });
  return order;
}

inline double remainder_metric(const std::vector<double>& errors,
                               const std::vector<std::uint8_t>& removed, MetricKind kind) {
  std::vector<double> vals;
  vals.reserve(errors.size());
  for (std::size_t j = 0; j < errors.size(); ++j) {
    if (removed[j]) continue;
    vals.push_back(kind == MetricKind::RMSE ? errors[j] * errors[j] : errors[j]);
  }
  const double mean = chunked_sum(vals) / static_cast<double>(vals.size());
  return kind == MetricKind::RMSE ? std::sqrt(mean) : mean;
}

}  // namespace detail

// Metric over the remaining pixels as the highest-ranked ones are removed.
// At fraction f the round(f*N) highest-ranked pixels are gone; the remainder
// metric is evaluated in pixel-index order.
inline SparsificationCurve sparsification_curve(const std::vector<double>& errors,
                                                const std::vector<double>& ranking,
                                                MetricKind kind, double step = 0.01) {
  if (errors.empty()) throw Error(ErrorKind::EmptyMask, "no pixels to sparsify");
  if (errors.size() != ranking.size())
    throw Error(ErrorKind::ShapeMismatch, "errors and ranking differ in length");
  if (!(step > 0.0) || step > 0.5) throw Error(ErrorKind::BadConfig, "step must be in (0, 0.5]");

  const std::size_t n = errors.size();
  const auto order = detail::removal_order(ranking);

  SparsificationCurve curve;
  curve.metric_kind = kind;
  std::vector<std::uint8_t> removed(n, 0);
  std::size_t n_removed = 0;
  for (std::size_t i = 0;; ++i) {
    const double f = static_cast<double>(i) * step;
    if (f >= 1.0 - 1e-12) break;
    // removal count rounds half away from zero and always leaves a remainder
    std::size_t m = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
    m = std::min(m, n - 1);
    while (n_removed < m) removed[order[n_removed++]] = 1;
    curve.fractions.push_back(f);
    curve.metric_values.push_back(detail::remainder_metric(errors, removed, kind));
  }
  return curve;
}

// Area under the sparsification error curve: the mean gap between the curve
// ranked by the supplied uncertainty and the oracle curve ranked by true
// error. Zero means the uncertainty ordering matches the error ordering.
inline double ause(const DepthMap& pred, const GroundTruthDepth& gt,
                   const UncertaintyMap& uncert, MetricKind kind, double step = 0.01) {
  detail::check_pred_gt(pred, gt);
  if (uncert.values.size() != gt.values.size())
    throw Error(ErrorKind::ShapeMismatch, "uncertainty length does not match pixels");

  const std::vector<double> errors = oracle_ranking(pred, gt, kind);
  std::vector<double> uncert_valid;
  uncert_valid.reserve(errors.size());
  for (std::size_t j = 0; j < gt.values.size(); ++j)
    if (gt.mask[j]) uncert_valid.push_back(uncert.values[j]);

  const SparsificationCurve by_uncert = sparsification_curve(errors, uncert_valid, kind, step);
  const SparsificationCurve by_oracle = sparsification_curve(errors, errors, kind, step);

  std::vector<double> gaps(by_uncert.metric_values.size());
  for (std::size_t i = 0; i < gaps.size(); ++i)
    gaps[i] = by_uncert.metric_values[i] - by_oracle.metric_values[i];
  return chunked_sum(gaps) / static_cast<double>(gaps.size());
}

}  // namespace carkit
