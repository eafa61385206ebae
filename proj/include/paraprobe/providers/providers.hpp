#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paraprobe/core/score_scale.hpp"
#include "paraprobe/prompts/prompts.hpp"

namespace paraprobe::providers {

/// Paraphrase generator (the attacking model).
class Generator {
 public:
  virtual ~Generator() = default;
  /// Exactly `count` texts, or throws Error(kProviderTimeout /
  /// kProviderMalformedOutput).
  virtual std::vector<std::string> generate(std::string_view prompt, int count, std::uint64_t seed) const = 0;
};

/// One reviewer call. The coordinates identify the call inside a run; they
/// are informational for real providers.
struct ReviewRequest {
  std::string_view document_text;
  std::string_view reviewer_prompt;
  std::optional<std::string> attachment_path;
  std::uint64_t seed = 0;
  int iteration = 0;
  int index = 0;
  int sample = 0;
  int attempt = 0;
};

/// Score-emitting evaluator. Returns the raw response text; parsing happens
/// in review().
class Reviewer {
 public:
  virtual ~Reviewer() = default;
  virtual std::string complete(const ReviewRequest& request) const = 0;
};

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  /// In [0, 1].
  virtual double similarity(std::string_view a, std::string_view b) const = 0;
};

class PerplexityScorer {
 public:
  virtual ~PerplexityScorer() = default;
  /// Strictly positive. Throws Error(kInvalidArgument) on empty text.
  virtual double perplexity(std::string_view text) const = 0;
};

class SentimentScorer {
 public:
  virtual ~SentimentScorer() = default;
  /// Probability of positive sentiment, in [0, 1].
  virtual double sentiment(std::string_view text) const = 0;
};

struct RetryPolicy {
  int retries = 3;
  std::chrono::milliseconds base_backoff{0};
  double backoff_multiplier = 2.0;

  /// Sleeps before retry number `attempt` (1-based).
  void backoff(int attempt) const;
};

struct ProviderSet {
  std::shared_ptr<const Generator> generator;
  std::shared_ptr<const Reviewer> reviewer;
  std::shared_ptr<const SimilarityScorer> similarity;
  std::shared_ptr<const PerplexityScorer> perplexity;
  std::shared_ptr<const SentimentScorer> sentiment;
  RetryPolicy retry;

  /// Throws Error(kInvalidConfig) naming the first missing mandatory handle.
  void require_core() const;
};

/// Calls the reviewer and parses its answer, retrying provider errors and
/// unparseable responses. Each retry uses a seed derived from the attempt
/// number. After the budget is spent, throws kUnparseableScore when the last
/// failure was a parse failure, otherwise the provider's own error.
prompts::ReviewOutput review(const Reviewer& reviewer, ReviewRequest request, const prompts::ReviewerTemplate& tmpl,
                             const ScoreScale& scale, const RetryPolicy& retry, prompts::ParseOptions options = {});

/// Generator call under the retry policy; the result always has `count`
/// entries.
std::vector<std::string> generate(const Generator& generator, std::string_view prompt, int count, std::uint64_t seed,
                                  const RetryPolicy& retry);

}  // namespace paraprobe::providers
