#pragma once

#include <stdexcept>
#include <string>

namespace j3s {

enum class ErrorCode {
  InvalidInput,
  InvalidConfig,
  InvalidValue,
  NotPositiveDefinite,
  NegativeFeature,
  TooFewColumns,
  PatchTooLarge,
  DimensionMismatch,
  EmptyClass,
  SingularSystem,
  NumericalDivergence,
  FormatError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Broad grouping used by the CLI to pick an exit code.
enum class ErrorCategory { Config, Data, Numerical };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace j3s
