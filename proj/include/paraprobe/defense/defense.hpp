#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "paraprobe/analysis/analysis.hpp"
#include "paraprobe/core/config.hpp"
#include "paraprobe/core/types.hpp"
#include "paraprobe/document/document.hpp"
#include "paraprobe/providers/providers.hpp"

namespace paraprobe::defense {

/// Defense paraphrases are unconstrained by default. With `filter` set, a
/// paraphrase that fails the similarity / perplexity-ratio check against the
/// text it replaces is discarded and the text is kept.
struct DefenseOptions {
  bool filter = false;
  double tau_sim = 0.85;
  double alpha_ppl = 1.2;
};

/// One zero-shot paraphrase of the target span (the possibly attacked
/// abstract), patched in.
doc::PatchResult defend_abstract(const SourceDocument& doc, const providers::ProviderSet& providers,
                                 std::uint64_t seed, const DefenseOptions& options = {});

/// Indices of `n` distinct paragraphs out of `count`, uniform without
/// replacement for the seed, in ascending order.
std::vector<std::size_t> choose_paragraphs(std::size_t count, int n, std::uint64_t seed);

/// Paraphrases n randomly chosen non-abstract paragraphs, each with its own
/// zero-shot call. Throws Error(kNotEnoughParagraphs) when n exceeds the
/// paragraph count.
doc::MultiPatchResult defend_random(const SourceDocument& doc, const providers::ProviderSet& providers, int n,
                                    std::uint64_t seed, const DefenseOptions& options = {});

struct PplDetection {
  bool flag = false;
  double ppl_ratio = 1.0;
};

/// PPL(attacked content) / PPL(original content) against `threshold`.
PplDetection detect_by_ppl(const analysis::ReviewPair& pair, const providers::PerplexityScorer& ppl, double threshold);

/// Single-review variant: flags reviews whose content perplexity exceeds the
/// given percentile of a reference corpus of review perplexities.
class CorpusPplDetector {
 public:
  CorpusPplDetector(std::vector<double> corpus_ppl, double percentile);
  double threshold() const noexcept { return threshold_; }
  bool flag(double review_ppl) const noexcept { return review_ppl > threshold_; }

 private:
  double threshold_ = 0.0;
};

struct SentimentGap {
  double gap = 0.0;  // normalized score minus content sentiment
};
SentimentGap detect_by_sentiment_gap(const prompts::ReviewOutput& review, const providers::SentimentScorer& sentiment,
                                     const ScoreScale& scale);

/// Score change relative to the original, in both readings: the ratio
/// score / original (undefined for an original of 0) and the difference of
/// min-max normalized scores.
struct ChangeRate {
  std::optional<double> ratio;
  double normalized_difference = 0.0;
};
ChangeRate change_rate(double score, double original_score, const ScoreScale& scale);

}  // namespace paraprobe::defense
