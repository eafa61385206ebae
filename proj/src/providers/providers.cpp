#include "paraprobe/providers/providers.hpp"

#include <cmath>
#include <thread>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"

namespace paraprobe::providers {

void RetryPolicy::backoff(int attempt) const {
  if (base_backoff.count() <= 0 || attempt <= 0) return;
  const double factor = std::pow(backoff_multiplier, attempt - 1);
  std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<std::int64_t>(base_backoff.count() * factor)));
}

void ProviderSet::require_core() const {
  if (!generator) throw Error(ErrorKind::kInvalidConfig, "provider set lacks a generator");
  if (!reviewer) throw Error(ErrorKind::kInvalidConfig, "provider set lacks a reviewer");
  if (!similarity) throw Error(ErrorKind::kInvalidConfig, "provider set lacks a similarity scorer");
  if (!perplexity) throw Error(ErrorKind::kInvalidConfig, "provider set lacks a perplexity scorer");
}

prompts::ReviewOutput review(const Reviewer& reviewer, ReviewRequest request, const prompts::ReviewerTemplate& tmpl,
                             const ScoreScale& scale, const RetryPolicy& retry, prompts::ParseOptions options) {
  if (request.document_text.empty() && !request.attachment_path) {
    throw Error(ErrorKind::kInvalidArgument, "review of an empty document");
  }
  const std::uint64_t base_seed = request.seed;
  std::optional<Error> last;
  for (int attempt = 0; attempt <= retry.retries; ++attempt) {
    if (attempt > 0) retry.backoff(attempt);
    request.attempt = attempt;
    request.seed = attempt == 0 ? base_seed : derive_seed(base_seed, {0x7265747279ULL, static_cast<std::uint64_t>(attempt)});
    try {
      const auto raw = reviewer.complete(request);
      return prompts::parse_review(raw, tmpl, scale, options);
    } catch (const Error& e) {
      if (!e.is_provider_error()) throw;
      last = e;
    }
  }
  const auto kind = last->kind();
  if (kind == ErrorKind::kMissingMarker || kind == ErrorKind::kInvalidScore) {
    throw Error(ErrorKind::kUnparseableScore,
                "no parseable score after " + std::to_string(retry.retries + 1) + " attempts: " + last->what());
  }
  throw *last;
}

std::vector<std::string> generate(const Generator& generator, std::string_view prompt, int count, std::uint64_t seed,
                                  const RetryPolicy& retry) {
  if (count < 1) throw Error(ErrorKind::kInvalidArgument, "generate needs count >= 1");
  std::optional<Error> last;
  for (int attempt = 0; attempt <= retry.retries; ++attempt) {
    if (attempt > 0) retry.backoff(attempt);
    const auto s = attempt == 0 ? seed : derive_seed(seed, {0x67656eULL, static_cast<std::uint64_t>(attempt)});
    try {
      auto out = generator.generate(prompt, count, s);
      if (static_cast<int>(out.size()) != count) {
        throw Error(ErrorKind::kProviderMalformedOutput,
                    "expected " + std::to_string(count) + " texts, got " + std::to_string(out.size()));
      }
      for (const auto& t : out) {
        if (trim(t).empty()) throw Error(ErrorKind::kProviderMalformedOutput, "empty paraphrase");
      }
      return out;
    } catch (const Error& e) {
      if (!e.is_provider_error()) throw;
      last = e;
    }
  }
  throw *last;
}

}  // namespace paraprobe::providers
