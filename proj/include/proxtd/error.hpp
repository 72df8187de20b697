#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace proxtd {

enum class ErrorCode {
  DimensionMismatch,
  SingularMatrix,
  NoConvergence,
  BadSpectrum,
  BadStochastic,
  NotPositiveDefinite,
  AssumptionViolated,
  UnsupportedTransition,
  MismatchedConfig,
  InnerNotConverged,
  EnumerationTooLarge,
  NoProperComponent,
  BadInitialCondition,
  NonMonotoneStep,
  ContractionCheckFailed,
  SelfCheckFailed,
  NotConverged,
  BadParams,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}

}  // namespace proxtd
