#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mckv {

enum class ErrorCode {
  OddResolution,
  NonPositiveLength,
  UnsupportedDimension,
  ShapeMismatch,
  InvalidPotential,
  RangeExceedsTorus,
  NotCatastrophic,
  InvalidDensity,
  AmplitudeTooLarge,
  NoClosingTriple,
  BallExceedsTorus,
  SpecMismatch,
  InvalidArgument,
  BlowUp,
  DegenerateDenominator,
  BracketCollapse,
  BudgetExceeded,
  EmptyPlot,
  UnknownKey,
  TypeMismatch,
  ConstraintViolation,
  Io,
  Internal,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mckv
