#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace paraprobe {

enum class ErrorKind {
  kInvalidConfig,
  kInvalidArgument,
  kProviderTimeout,
  kProviderMalformedOutput,
  kProviderExhausted,
  kUnparseableScore,
  kMissingMarker,
  kInvalidScore,
  kAllCandidatesFiltered,
  kBelowMinimumSuccesses,
  kEmptyPool,
  kAbstractNotFound,
  kMultipleAbstracts,
  kCompileFailed,
  kHookUnconfigured,
  kOutOfRange,
  kAllZeroDiffs,
  kMissingBaseline,
  kNotEnoughParagraphs,
  kDegenerate,
  kMalformedRecords,
  kIo,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto a stable exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_provider_error() const noexcept {
    return kind_ == ErrorKind::kProviderTimeout ||
           kind_ == ErrorKind::kProviderMalformedOutput ||
           kind_ == ErrorKind::kProviderExhausted ||
           kind_ == ErrorKind::kUnparseableScore ||
           kind_ == ErrorKind::kMissingMarker ||
           kind_ == ErrorKind::kInvalidScore;
  }

 private:
  ErrorKind kind_;
};

}  // namespace paraprobe
