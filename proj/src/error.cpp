#include "npat/error.hpp"

namespace npat {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonDivisibleSpacing: return "NonDivisibleSpacing";
    case ErrorKind::PadTooSmall: return "PadTooSmall";
    case ErrorKind::InteriorViolation: return "InteriorViolation";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::IllPosedBoundary: return "IllPosedBoundary";
    case ErrorKind::DriveMismatch: return "DriveMismatch";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::VelocityNotZero: return "VelocityNotZero";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NonFiniteField: return "NonFiniteField";
    case ErrorKind::NonFiniteRay: return "NonFiniteRay";
    case ErrorKind::CgDivergence: return "CgDivergence";
    case ErrorKind::GeometryMismatch: return "GeometryMismatch";
  }
  return "Unknown";
}

int Error::exit_code() const noexcept {
  switch (kind_) {
    case ErrorKind::NonFiniteField:
    case ErrorKind::NonFiniteRay:
    case ErrorKind::CgDivergence:
    case ErrorKind::InsufficientData:
      return 2;
    case ErrorKind::GeometryMismatch:
      return 3;
    default:
      return 1;
  }
}

}  // namespace npat
