#pragma once

#include <stdexcept>
#include <string>

namespace npat {

enum class ErrorKind {
  // configuration / contract violations
  NonDivisibleSpacing,
  PadTooSmall,
  InteriorViolation,
  EmptyMask,
  CflViolation,
  IllPosedBoundary,
  DriveMismatch,
  SupportViolation,
  VelocityNotZero,
  InsufficientData,
  InvalidArgument,
  ConfigError,
  IoError,
  // numerical failures
  NonFiniteField,
  NonFiniteRay,
  CgDivergence,
  // data does not match the configured geometry
  GeometryMismatch,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Process exit code used by the command line tool: 1 config, 2 numeric, 3 geometry.
  int exit_code() const noexcept;

 private:
  ErrorKind kind_;
};

}  // namespace npat
