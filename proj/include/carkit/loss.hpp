#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "carkit/array.hpp"
#include "carkit/error.hpp"
#include "carkit/types.hpp"

namespace carkit {

using LogitMap = Matrix;  // N x C, C = K for softmax heads, 2K for the ordinal head

// Scalar loss (mean over valid pixels) plus its analytic gradient with respect
// to the inputs the op was given. Gradient rows of masked-out pixels are zero.
struct LossResult {
  double value = 0.0;
  Matrix grad;
};

// Whether the smooth-L1 regression target is the class index as written (k)
// or shifted to match the expected-index range (k+1).
enum class SmoothL1Target { Corrected, Literal };

namespace detail {

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline std::size_t check_masked_pair(const Matrix& logits, const Matrix& target,
                                     const Mask& mask) {
  if (!logits.same_shape(target))
    throw Error(ErrorKind::ShapeMismatch, "logits and target shapes differ");
  if (mask.size() != logits.rows)
    throw Error(ErrorKind::ShapeMismatch, "mask length does not match row count");
  const std::size_t n_valid = count_valid(mask);
  if (n_valid == 0) throw Error(ErrorKind::EmptyMask, "no valid pixels");
  return n_valid;
}

// Writes row-wise softmax of `logits` into `out` and returns per-row logsumexp
// shifted by the row max, for use in log-softmax terms.
inline void softmax_row(std::span<const double> l, std::span<double> out, double& max_out,
                        double& lse_out) {
  double m = l[0];
  for (double x : l) m = std::max(m, x);
  double denom = 0.0;
  for (std::size_t p = 0; p < l.size(); ++p) {
    out[p] = std::exp(l[p] - m);
    denom += out[p];
  }
  for (auto& x : out) x /= denom;
  max_out = m;
  lse_out = m + std::log(denom);
}

}  // namespace detail

// Row-wise softmax with max subtraction.
inline ProbMap softmax(const Matrix& logits) {
  require_finite(logits, "logits");
  if (logits.cols == 0) throw Error(ErrorKind::ShapeMismatch, "logits need at least one column");
  ProbMap out;
  out.semantics = ProbSemantics::Softmax;
  out.data = Matrix(logits.rows, logits.cols);
  for (std::size_t j = 0; j < logits.rows; ++j) {
    double m, lse;
    detail::softmax_row(logits.row(j), out.data.row(j), m, lse);
  }
  return out;
}

// Paired-softmax head: for class p, the probability is sigmoid of the
// difference between logits 2p+1 and 2p.
inline ProbMap paired_sigmoid(const Matrix& logits) {
  require_finite(logits, "logits");
  if (logits.cols % 2 != 0)
    throw Error(ErrorKind::OddChannels, "paired head needs an even channel count");
  ProbMap out;
  out.semantics = ProbSemantics::PerClassSigmoid;
  out.data = Matrix(logits.rows, logits.cols / 2);
  for (std::size_t j = 0; j < logits.rows; ++j)
    for (std::size_t p = 0; p < out.data.cols; ++p)
      out.data(j, p) = detail::stable_sigmoid(logits(j, 2 * p + 1) - logits(j, 2 * p));
  return out;
}

// Cross entropy against (one-hot) targets. Value uses log-softmax directly so
// saturated correct predictions reach zero instead of a clamp floor.
inline LossResult ce_loss(const Matrix& logits, const Matrix& target, const Mask& mask) {
  require_finite(logits, "logits");
  const std::size_t n_valid = detail::check_masked_pair(logits, target, mask);

  LossResult res;
  res.grad = Matrix(logits.rows, logits.cols);
  std::vector<double> per_pixel;
  per_pixel.reserve(n_valid);
  std::vector<double> probs(logits.cols);
  for (std::size_t j = 0; j < logits.rows; ++j) {
    if (!mask[j]) continue;
    double m, lse;
    detail::softmax_row(logits.row(j), probs, m, lse);
    double lj = 0.0;
    for (std::size_t p = 0; p < logits.cols; ++p) {
      if (target(j, p) != 0.0) lj -= target(j, p) * (logits(j, p) - lse);
      res.grad(j, p) = (probs[p] - target(j, p)) / static_cast<double>(n_valid);
    }
    per_pixel.push_back(lj);
  }
  res.value = chunked_sum(per_pixel) / static_cast<double>(n_valid);
  return res;
}

// Cross entropy against soft (possibly unnormalized) targets. Identical value
// formula to ce_loss; the gradient carries the target mass as a factor.
inline LossResult weighted_ce_loss(const Matrix& logits, const Matrix& target,
                                   const Mask& mask) {
  require_finite(logits, "logits");
  const std::size_t n_valid = detail::check_masked_pair(logits, target, mask);

  LossResult res;
  res.grad = Matrix(logits.rows, logits.cols);
  std::vector<double> per_pixel;
  per_pixel.reserve(n_valid);
  std::vector<double> probs(logits.cols);
  for (std::size_t j = 0; j < logits.rows; ++j) {
    if (!mask[j]) continue;
    double m, lse;
    detail::softmax_row(logits.row(j), probs, m, lse);
    double lj = 0.0;
    double mass = 0.0;
    for (std::size_t p = 0; p < logits.cols; ++p) {
      if (target(j, p) < 0.0)
        throw Error(ErrorKind::TargetOutOfRange, "weighted CE target must be nonnegative");
      lj -= target(j, p) * (logits(j, p) - lse);
      mass += target(j, p);
    }
    for (std::size_t p = 0; p < logits.cols; ++p)
      res.grad(j, p) = (mass * probs[p] - target(j, p)) / static_cast<double>(n_valid);
    per_pixel.push_back(lj);
  }
  res.value = chunked_sum(per_pixel) / static_cast<double>(n_valid);
  return res;
}

// Independent binary cross entropy per class on sigmoid outputs.
inline LossResult multi_bce_loss(const Matrix& logits, const Matrix& target, const Mask& mask) {
  require_finite(logits, "logits");
  const std::size_t n_valid = detail::check_masked_pair(logits, target, mask);

  LossResult res;
  res.grad = Matrix(logits.rows, logits.cols);
  std::vector<double> per_pixel;
  per_pixel.reserve(n_valid);
  for (std::size_t j = 0; j < logits.rows; ++j) {
    if (!mask[j]) continue;
    double lj = 0.0;
    for (std::size_t p = 0; p < logits.cols; ++p) {
      const double y = target(j, p);
      if (y < 0.0 || y > 1.0)
        throw Error(ErrorKind::TargetOutOfRange, "BCE target outside [0, 1]");
      const double l = logits(j, p);
      lj += detail::softplus(l) - y * l;  // == -[y log s + (1-y) log (1-s)]
      res.grad(j, p) = (detail::stable_sigmoid(l) - y) / static_cast<double>(n_valid);
    }
    per_pixel.push_back(lj);
  }
  res.value = chunked_sum(per_pixel) / static_cast<double>(n_valid);
  return res;
}

// Ordinal regression loss on a 2K-channel head: per class p the predicted
// probability is sigmoid(l_{2p+1} - l_{2p}), scored with BCE against the
// ordinal prefix target. Gradients land on both paired logits with opposite
// signs.
inline LossResult ordinal_loss(const Matrix& logits, const Matrix& target, const Mask& mask) {
  require_finite(logits, "logits");
  if (logits.cols % 2 != 0)
    throw Error(ErrorKind::OddChannels, "ordinal loss needs an even channel count");
  const std::size_t k = logits.cols / 2;
  if (target.cols != k || target.rows != logits.rows)
    throw Error(ErrorKind::ShapeMismatch, "ordinal target must be N x K for 2K logits");
  if (mask.size() != logits.rows)
    throw Error(ErrorKind::ShapeMismatch, "mask length does not match row count");
  const std::size_t n_valid = count_valid(mask);
  if (n_valid == 0) throw Error(ErrorKind::EmptyMask, "no valid pixels");

  LossResult res;
  res.grad = Matrix(logits.rows, logits.cols);
  std::vector<double> per_pixel;
  per_pixel.reserve(n_valid);
  for (std::size_t j = 0; j < logits.rows; ++j) {
    if (!mask[j]) continue;
    double lj = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double y = target(j, p);
      const double z = logits(j, 2 * p + 1) - logits(j, 2 * p);
      lj += detail::softplus(z) - y * z;
      const double g = (detail::stable_sigmoid(z) - y) / static_cast<double>(n_valid);
      res.grad(j, 2 * p + 1) = g;
      res.grad(j, 2 * p) = -g;
    }
    per_pixel.push_back(lj);
  }
  res.value = chunked_sum(per_pixel) / static_cast<double>(n_valid);
  return res;
}

namespace detail {

inline double smooth_l1_target(int k, SmoothL1Target mode) {
  return mode == SmoothL1Target::Corrected ? static_cast<double>(k) + 1.0
                                           : static_cast<double>(k);
}

inline double smooth_l1_branch(double e, double& dloss_de) {
  if (std::abs(e) < 1.0) {
    dloss_de = e;
    return 0.5 * e * e;
  }
  dloss_de = e > 0.0 ? 1.0 : -1.0;
  return std::abs(e) - 0.5;
}

}  // namespace detail

// Smooth L1 between the expected class index sum_p y_p (p+1) and the target
// class. Gradient is with respect to the probabilities.
inline LossResult smooth_l1_loss(const ProbMap& probs, const std::vector<int>& target_class,
                                 const Mask& mask,
                                 SmoothL1Target mode = SmoothL1Target::Corrected) {
  require_softmax(probs, "smooth_l1_loss");
  const Matrix& y = probs.data;
  if (target_class.size() != y.rows || mask.size() != y.rows)
    throw Error(ErrorKind::ShapeMismatch, "target/mask length does not match row count");
  const std::size_t n_valid = count_valid(mask);
  if (n_valid == 0) throw Error(ErrorKind::EmptyMask, "no valid pixels");

  LossResult res;
  res.grad = Matrix(y.rows, y.cols);
  std::vector<double> per_pixel;
  per_pixel.reserve(n_valid);
  for (std::size_t j = 0; j < y.rows; ++j) {
    if (!mask[j]) continue;
    double dhat = 0.0;
    for (std::size_t p = 0; p < y.cols; ++p) dhat += y(j, p) * static_cast<double>(p + 1);
    double g;
    per_pixel.push_back(
        detail::smooth_l1_branch(dhat - detail::smooth_l1_target(target_class[j], mode), g));
    for (std::size_t p = 0; p < y.cols; ++p)
      res.grad(j, p) = g * static_cast<double>(p + 1) / static_cast<double>(n_valid);
  }
  res.value = chunked_sum(per_pixel) / static_cast<double>(n_valid);
  return res;
}

// Same loss evaluated on logits, with the gradient chained through softmax.
inline LossResult smooth_l1_loss_logits(const Matrix& logits,
                                        const std::vector<int>& target_class, const Mask& mask,
                                        SmoothL1Target mode = SmoothL1Target::Corrected) {
  require_finite(logits, "logits");
  if (target_class.size() != logits.rows || mask.size() != logits.rows)
    throw Error(ErrorKind::ShapeMismatch, "target/mask length does not match row count");
  const std::size_t n_valid = count_valid(mask);
  if (n_valid == 0) throw Error(ErrorKind::EmptyMask, "no valid pixels");

  LossResult res;
  res.grad = Matrix(logits.rows, logits.cols);
  std::vector<double> per_pixel;
  per_pixel.reserve(n_valid);
  std::vector<double> probs(logits.cols);
  for (std::size_t j = 0; j < logits.rows; ++j) {
    if (!mask[j]) continue;
    double m, lse;
    detail::softmax_row(logits.row(j), probs, m, lse);
    double dhat = 0.0;
    for (std::size_t p = 0; p < logits.cols; ++p) dhat += probs[p] * static_cast<double>(p + 1);
    double g;
    per_pixel.push_back(
        detail::smooth_l1_branch(dhat - detail::smooth_l1_target(target_class[j], mode), g));
    for (std::size_t p = 0; p < logits.cols; ++p)
      res.grad(j, p) = g * probs[p] * (static_cast<double>(p + 1) - dhat) /
                       static_cast<double>(n_valid);
  }
  res.value = chunked_sum(per_pixel) / static_cast<double>(n_valid);
  return res;
}

// Scale-invariant log loss. Gradient is with respect to the predicted depths
// (one column per pixel row).
inline LossResult scale_invariant_loss(const DepthMap& pred, const GroundTruthDepth& gt,
                                       double omega = 10.0, double lambda = 0.85) {
  validate_ground_truth(gt);
  if (pred.values.size() != gt.values.size())
    throw Error(ErrorKind::ShapeMismatch, "prediction and ground truth differ in length");
  if (pred.mask != gt.mask) throw Error(ErrorKind::MaskMismatch, "masks differ");
  const std::size_t n_valid = count_valid(gt.mask);
  if (n_valid == 0) throw Error(ErrorKind::EmptyMask, "no valid pixels");

  const double n = static_cast<double>(n_valid);
  std::vector<double> h;
  std::vector<double> h_sq;
  h.reserve(n_valid);
  h_sq.reserve(n_valid);
  for (std::size_t j = 0; j < pred.values.size(); ++j) {
    if (!gt.mask[j]) continue;
    if (!(pred.values[j] > 0.0))
      throw Error(ErrorKind::NonPositiveDepth, "predicted depth must be > 0");
    const double hj = std::log(pred.values[j]) - std::log(gt.values[j]);
    h.push_back(hj);
    h_sq.push_back(hj * hj);
  }
  const double s1 = chunked_sum(h);
  const double s2 = chunked_sum(h_sq);
  const double inner = s2 / n - lambda * s1 * s1 / (n * n);

  LossResult res;
  res.grad = Matrix(pred.values.size(), 1);
  res.value = omega * std::sqrt(std::max(inner, 0.0));
  if (res.value > 0.0) {
    std::size_t v = 0;
    for (std::size_t j = 0; j < pred.values.size(); ++j) {
      if (!gt.mask[j]) continue;
      const double dl_dh = omega * (h[v] / n - lambda * s1 / (n * n)) / (res.value / omega);
      res.grad(j, 0) = dl_dh / pred.values[j];
      ++v;
    }
  }
  return res;
}

// Central-difference check of an analytic gradient. `loss_op` maps a flat
// parameter vector to a LossResult whose grad has the same number of entries.
// Returns max over entries of |analytic - numeric| / max(1, |numeric|).
inline double finite_diff_check(
    const std::function<LossResult(const std::vector<double>&)>& loss_op,
    std::vector<double> point, double epsilon = 1e-6) {
  const LossResult at_point = loss_op(point);
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + epsilon;
    const double up = loss_op(point).value;
    point[i] = saved - epsilon;
    const double down = loss_op(point).value;
    point[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err = std::abs(at_point.grad.data[i] - numeric) / std::max(1.0, std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace carkit
