#include "annealab/error.hpp"

namespace annealab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::StepOverflow: return "StepOverflow";
    case ErrorCode::DegenerateCritical: return "DegenerateCritical";
    case ErrorCode::AllCensored: return "AllCensored";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NotSuboptimal: return "NotSuboptimal";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message,
                    const std::vector<std::string>& details) {
  std::string out{to_string(code)};
  out += ": ";
  out += message;
  for (const auto& d : details) {
    out += "\n  - ";
    out += d;
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::vector<std::string> details)
    : std::runtime_error(compose(code, message, details)),
      code_(code),
      message_(message),
      details_(std::move(details)) {}

}  // namespace annealab
