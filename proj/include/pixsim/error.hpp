#pragma once

#include <stdexcept>
#include <string>

namespace pixsim {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  Singular,
  StateOutOfRange,
  Io,
  Syntax,
  UnknownDevicePrefix,
  DuplicateName,
  Validation,
  NonConvergence,
  StepUnderflow,
  EmptyWindow,
  InsufficientPoints,
  NoKnee,
  NoSensitiveRegion,
  MissingGeometry,
  Config,
};

const char* to_string(ErrorCode code);

// Single exception type for the core; the code carries the category and
// line/column are populated for netlist errors (1-based, 0 when unknown).
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message, int line = 0, int column = 0)
      : std::runtime_error(message), code_(code), line_(line), column_(column) {}

  ErrorCode code() const noexcept { return code_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  ErrorCode code_;
  int line_;
  int column_;
};

}  // namespace pixsim
