#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace psforge {

enum class ErrorCode {
  BadSignature,
  MissingBoundingBox,
  MalformedString,
  UnbalancedGsave,
  TagCollision,
  NonFinite,
  EmptyRange,
  BadDimension,
  BadAlignCode,
  DuplicateTag,
  DegenerateBox,
  AllEmpty,
  ParseFailure,
  ToolNotFound,
  StageFailed,
  MissingAlignment,
  ParseError,
  IoError,
  UnknownMode,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised when an external tool cannot be resolved; `stage` names the tool.
class ToolNotFoundError : public Error {
 public:
  ToolNotFoundError(std::string stage, const std::string& message)
      : Error(ErrorCode::ToolNotFound, message), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Raised when a toolchain stage runs but fails; carries the captured logs
// and human-oriented hints extracted from them.
class StageFailedError : public Error {
 public:
  StageFailedError(std::string stage, std::string log_text, std::vector<std::string> hints,
                   const std::string& message)
      : Error(ErrorCode::StageFailed, message),
        stage_(std::move(stage)),
        log_text_(std::move(log_text)),
        hints_(std::move(hints)) {}

  const std::string& stage() const { return stage_; }
  const std::string& log_text() const { return log_text_; }
  const std::vector<std::string>& hints() const { return hints_; }

 private:
  std::string stage_;
  std::string log_text_;
  std::vector<std::string> hints_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::MissingBoundingBox: return "MissingBoundingBox";
    case ErrorCode::MalformedString: return "MalformedString";
    case ErrorCode::UnbalancedGsave: return "UnbalancedGsave";
    case ErrorCode::TagCollision: return "TagCollision";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::BadAlignCode: return "BadAlignCode";
    case ErrorCode::DuplicateTag: return "DuplicateTag";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::AllEmpty: return "AllEmpty";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::ToolNotFound: return "ToolNotFound";
    case ErrorCode::StageFailed: return "StageFailed";
    case ErrorCode::MissingAlignment: return "MissingAlignment";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownMode: return "UnknownMode";
  }
  return "Error";
}

}  // namespace psforge
