#include "epc/error.hpp"

namespace epc {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kOverlappingSpans: return "OverlappingSpans";
    case ErrorCode::kSpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorCode::kCacheMiss: return "CacheMiss";
    case ErrorCode::kAdapterFailure: return "AdapterFailure";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kClassTooSmall: return "ClassTooSmall";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace epc
