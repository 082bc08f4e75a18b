#ifndef EPC_ERROR_HPP_
#define EPC_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace epc {

enum class ErrorCode {
  kInvalidArgument,
  kFileNotFound,
  kMalformedLine,
  kUnknownLabel,
  kDuplicateId,
  kOverlappingSpans,
  kSpanOutOfBounds,
  kCacheMiss,
  kAdapterFailure,
  kIoFailure,
  kNonFiniteInput,
  kDimensionMismatch,
  kEmptyTrainingSet,
  kNonFiniteLoss,
  kVersionMismatch,
  kParseError,
  kLengthMismatch,
  kClassTooSmall,
};

std::string_view error_code_name(ErrorCode code);

// User- or data-level failure. The CLI maps these to exit code 1; anything
// else escaping a command is treated as an internal error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace epc

#endif  // EPC_ERROR_HPP_
