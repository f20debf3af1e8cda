#pragma once

#include <cmath>
#include <cstddef>

#include "carkit/array.hpp"
#include "carkit/error.hpp"

namespace carkit {

// Per-pixel ground truth. Masked-in entries must be finite and positive.
struct GroundTruthDepth {
  std::vector<double> values;
  Mask mask;

  std::size_t size() const { return values.size(); }
};

inline void validate_ground_truth(const GroundTruthDepth& gt) {
  if (gt.values.size() != gt.mask.size())
    throw Error(ErrorKind::ShapeMismatch, "ground truth values and mask differ in length");
  for (std::size_t j = 0; j < gt.values.size(); ++j) {
    if (!gt.mask[j]) continue;
    if (!std::isfinite(gt.values[j]))
      throw Error(ErrorKind::NonFinite, "masked-in ground truth is not finite");
    if (!(gt.values[j] > 0.0))
      throw Error(ErrorKind::NonPositiveDepth, "masked-in ground truth must be > 0");
  }
}

// Whether a prediction map came from a softmax head (rows sum to 1) or from
// per-class sigmoids (entries in [0,1], rows free).
enum class ProbSemantics { Softmax, PerClassSigmoid };

struct ProbMap {
  Matrix data;
  ProbSemantics semantics = ProbSemantics::Softmax;
};

inline void require_softmax(const ProbMap& probs, const char* what) {
  if (probs.semantics != ProbSemantics::Softmax)
    throw Error(ErrorKind::SemanticsMismatch, std::string(what) + " needs Softmax probabilities");
}

inline void require_sigmoid(const ProbMap& probs, const char* what) {
  if (probs.semantics != ProbSemantics::PerClassSigmoid)
    throw Error(ErrorKind::SemanticsMismatch,
                std::string(what) + " needs per-class sigmoid probabilities");
}

// Continuous per-pixel depth with validity mask.
struct DepthMap {
  std::vector<double> values;
  Mask mask;

  std::size_t size() const { return values.size(); }
};

}  // namespace carkit
