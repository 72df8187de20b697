#include "proxtd/error.hpp"

namespace proxtd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadSpectrum: return "BadSpectrum";
    case ErrorCode::BadStochastic: return "BadStochastic";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::UnsupportedTransition: return "UnsupportedTransition";
    case ErrorCode::MismatchedConfig: return "MismatchedConfig";
    case ErrorCode::InnerNotConverged: return "InnerNotConverged";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::NoProperComponent: return "NoProperComponent";
    case ErrorCode::BadInitialCondition: return "BadInitialCondition";
    case ErrorCode::NonMonotoneStep: return "NonMonotoneStep";
    case ErrorCode::ContractionCheckFailed: return "ContractionCheckFailed";
    case ErrorCode::SelfCheckFailed: return "SelfCheckFailed";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::BadParams: return "BadParams";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace proxtd
