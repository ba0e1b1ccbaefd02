#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perpetual {

enum class ErrorCode {
  // numerics
  NoSignChange,
  MaxIterExceeded,
  MaxSubdivisions,
  NonFiniteIntegrand,
  StepUnderflow,
  StopNeverReached,
  // volatility
  NonPositiveAsset,
  NonPositiveGamma,
  InversionFailed,
  NegativeArgument,
  // merton / solver
  InvalidParams,
  NotSIndependent,
  NoRoot,
  BracketExpansionFailed,
  HorizonExceeded,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can tell configuration problems apart
/// from numerical breakdowns.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace perpetual
