#include "j3s/error.hpp"

namespace j3s {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NegativeFeature: return "NegativeFeature";
    case ErrorCode::TooFewColumns: return "TooFewColumns";
    case ErrorCode::PatchTooLarge: return "PatchTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig:
      return ErrorCategory::Config;
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::SingularSystem:
    case ErrorCode::NumericalDivergence:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace j3s
