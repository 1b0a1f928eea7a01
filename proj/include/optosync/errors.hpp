#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace optosync {

enum class ErrorCode {
  // parameter validation
  kNonPositiveRate,
  kNegativeOccupation,
  kNonFiniteParameter,
  kMissingField,
  kInvalidArgument,
  // configuration
  kSyntaxError,
  kUnknownKey,
  kConflictingSource,
  kUnknownAxis,
  kUnknownPreset,
  kSinkUnavailable,
  // numerics
  kNonFinite,
  kDiverged,
  kPhysicalityLost,
  kStepUnderflow,
  kDegenerateVariance,
  kWindowTooShort,
};

std::string_view to_string(ErrorCode code);

/// True for failures of the numerics (as opposed to bad input).
constexpr bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFinite:
    case ErrorCode::kDiverged:
    case ErrorCode::kPhysicalityLost:
    case ErrorCode::kStepUnderflow:
    case ErrorCode::kDegenerateVariance:
    case ErrorCode::kWindowTooShort:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Violation {
  ErrorCode code;
  std::string field;
  std::string message;
};

/// Carries every violation found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }
  bool has(ErrorCode code) const;

 private:
  std::vector<Violation> violations_;
};

}  // namespace optosync
