#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unfold {

enum class ErrorCode {
  InvalidArgument,
  EmptyHistogram,
  IndexOutOfRange,
  GridMismatch,
  ShapeMismatch,
  ZeroResponse,
  NonPositiveSigma,
  BadOrder,
  NegativeCounts,
  MissingNormEstimate,
  InsufficientTrace,
  TooLarge,
  BadReplicaCount,
  BadParams,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace unfold
