#pragma once

#include <stdexcept>
#include <string>

namespace carkit {

enum class ErrorKind {
  NonPositiveMin,
  BadRange,
  ZeroBins,
  DegenerateWidths,
  NonPositiveDepth,
  NonFinite,
  ShapeMismatch,
  TargetOutOfRange,
  OddChannels,
  SemanticsMismatch,
  TooFewMembers,
  MaskMismatch,
  EmptyMask,
  BadMagic,
  UnsupportedDtype,
  BadConfig,
  DivergedLoss,
  IoError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonPositiveMin: return "NonPositiveMin";
    case ErrorKind::BadRange: return "BadRange";
    case ErrorKind::ZeroBins: return "ZeroBins";
    case ErrorKind::DegenerateWidths: return "DegenerateWidths";
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorKind::OddChannels: return "OddChannels";
    case ErrorKind::SemanticsMismatch: return "SemanticsMismatch";
    case ErrorKind::TooFewMembers: return "TooFewMembers";
    case ErrorKind::MaskMismatch: return "MaskMismatch";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::DivergedLoss: return "DivergedLoss";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// Single exception type carrying a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace carkit
