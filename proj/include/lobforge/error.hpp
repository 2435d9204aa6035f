#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lobforge {

enum class ErrorCode {
  EmptySide,
  InconsistentActivity,
  NotPositiveDefinite,
  InvalidConfig,
  InvalidRatio,
  CrossedSpec,
  DegenerateDay,
  DegenerateSeries,
  LengthMismatch,
  InsufficientReplications,
  ParseError,
  MonotonicityError,
  ReplayError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySide: return "EmptySide";
    case ErrorCode::InconsistentActivity: return "InconsistentActivity";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::CrossedSpec: return "CrossedSpec";
    case ErrorCode::DegenerateDay: return "DegenerateDay";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InsufficientReplications: return "InsufficientReplications";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MonotonicityError: return "MonotonicityError";
    case ErrorCode::ReplayError: return "ReplayError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lobforge
