#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hill {

enum class ErrorCode {
  MeanNotZero,
  DutyOutOfRange,
  EmptyPiecewise,
  InvalidBreakpoints,
  NonFiniteState,
  BothDerivativesVanish,
  BracketNotFound,
  NoWindowFound,
  TipNotFound,
  PreconditionViolated,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code next to the diagnostic text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hill
