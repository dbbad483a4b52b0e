#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aesthetic {

enum class ErrorCode {
  UnsupportedFormat,
  CorruptStream,
  MissingEntry,
  MalformedSidecar,
  DimensionMismatch,
  EmptyInput,
  DegenerateInput,
  KernelTooLarge,
  InvalidArgument,
  LengthMismatch,
  EmptySelection,
  EmptyDataset,
  NonFiniteLoss,
  ParseError,
  DuplicateId,
  ScoreOutOfRange,
  NoSuchLabel,
  MissingTruth,
  EmptyIntersection,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptStream: return "CorruptStream";
    case ErrorCode::MissingEntry: return "MissingEntry";
    case ErrorCode::MalformedSidecar: return "MalformedSidecar";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::KernelTooLarge: return "KernelTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::NoSuchLabel: return "NoSuchLabel";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace aesthetic
