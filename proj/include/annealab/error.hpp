#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace annealab {

enum class ErrorCode {
  ZeroVector,
  DimensionMismatch,
  InvalidArgument,
  InvalidSchedule,
  StepOverflow,
  DegenerateCritical,
  AllCensored,
  InsufficientData,
  NotSuboptimal,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `details` carries the individual failures when
/// more than one problem is reported at once (config validation).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::vector<std::string> details_;
};

}  // namespace annealab
