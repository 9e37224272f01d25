#include "varistep/error.hpp"

namespace varistep {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Capability: return "CapabilityError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Name: return "NameError";
    case ErrorCode::Eval: return "EvalError";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonpositiveStep: return "NonpositiveStep";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::SingularDomain: return "SingularDomain";
    case ErrorCode::Io: return "IoError";
  }
  return "UnknownError";
}

namespace {

std::string format_parse_message(std::size_t offset, const std::vector<std::string>& expected,
                                 const std::string& detail) {
  std::string msg = "parse error at offset " + std::to_string(offset) + ": " + detail;
  if (!expected.empty()) {
    msg += " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i != 0) msg += ", ";
      msg += expected[i];
    }
    msg += ")";
  }
  return msg;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected,
                       const std::string& detail)
    : Error(ErrorCode::Parse, format_parse_message(offset, expected, detail)),
      offset_(offset),
      expected_(std::move(expected)) {}

}  // namespace varistep
