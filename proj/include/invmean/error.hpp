#pragma once

#include <stdexcept>
#include <string>

namespace invmean {

enum class ErrorKind {
  OutOfDomain,
  EmptySupport,
  NonFiniteValue,
  NotMonotone,
  OutOfRange,
  ConvergenceFailure,
  DomainMismatch,
  MeanOutOfBounds,
  InvariantViolation,
  CapExceeded,
  InvalidArgument,
  ParseError,
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::MeanOutOfBounds: return "MeanOutOfBounds";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace invmean
