#include "paraprobe/core/error.hpp"

namespace paraprobe {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kProviderTimeout: return "provider-timeout";
    case ErrorKind::kProviderMalformedOutput: return "provider-malformed-output";
    case ErrorKind::kProviderExhausted: return "provider-exhausted";
    case ErrorKind::kUnparseableScore: return "unparseable-score";
    case ErrorKind::kMissingMarker: return "missing-marker";
    case ErrorKind::kInvalidScore: return "invalid-score";
    case ErrorKind::kAllCandidatesFiltered: return "all-candidates-filtered";
    case ErrorKind::kBelowMinimumSuccesses: return "below-minimum-successes";
    case ErrorKind::kEmptyPool: return "empty-pool";
    case ErrorKind::kAbstractNotFound: return "abstract-not-found";
    case ErrorKind::kMultipleAbstracts: return "multiple-abstracts";
    case ErrorKind::kCompileFailed: return "compile-failed";
    case ErrorKind::kHookUnconfigured: return "hook-unconfigured";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kAllZeroDiffs: return "all-zero-diffs";
    case ErrorKind::kMissingBaseline: return "missing-baseline";
    case ErrorKind::kNotEnoughParagraphs: return "not-enough-paragraphs";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kMalformedRecords: return "malformed-records";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace paraprobe
