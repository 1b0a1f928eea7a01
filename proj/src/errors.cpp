#include "optosync/errors.hpp"

#include <algorithm>

namespace optosync {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveRate: return "NonPositiveRate";
    case ErrorCode::kNegativeOccupation: return "NegativeOccupation";
    case ErrorCode::kNonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kConflictingSource: return "ConflictingSource";
    case ErrorCode::kUnknownAxis: return "UnknownAxis";
    case ErrorCode::kUnknownPreset: return "UnknownPreset";
    case ErrorCode::kSinkUnavailable: return "SinkUnavailable";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kPhysicalityLost: return "PhysicalityLost";
    case ErrorCode::kStepUnderflow: return "StepUnderflow";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kWindowTooShort: return "WindowTooShort";
  }
  return "Unknown";
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += std::string(to_string(v.code)) + " [" + v.field + "] " + v.message;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::kInvalidArgument : violations.front().code,
            join_violations(violations)),
      violations_(std::move(violations)) {}

bool ValidationError::has(ErrorCode code) const {
  return std::any_of(violations_.begin(), violations_.end(),
                     [code](const Violation& v) { return v.code == code; });
}

}  // namespace optosync
