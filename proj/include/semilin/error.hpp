#pragma once

#include <stdexcept>
#include <string>

namespace semilin {

enum class ErrorKind {
  NonPositiveArgument,
  InvalidParameter,
  EvaluationFailure,
  SignChange,
  Divergence,
  RhoUndefined,
  UnsupportedTheorem,
  NegativeRadicand,
  Infeasible,
  HypothesisViolation,
  InvalidDelta,
  DimensionMismatch,
  InvalidAlpha,
  NoConvergence,
  PositivityLost,
  BlowUp,
  KindMismatch,
  NoRoot,
  RangeViolation,
  ParseError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::EvaluationFailure: return "EvaluationFailure";
    case ErrorKind::SignChange: return "SignChange";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::RhoUndefined: return "RhoUndefined";
    case ErrorKind::UnsupportedTheorem: return "UnsupportedTheorem";
    case ErrorKind::NegativeRadicand: return "NegativeRadicand";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::HypothesisViolation: return "HypothesisViolation";
    case ErrorKind::InvalidDelta: return "InvalidDelta";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::PositivityLost: return "PositivityLost";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the command line front end) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace semilin
