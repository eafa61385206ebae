#include "paraprobe/defense/defense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"
#include "paraprobe/prompts/prompts.hpp"

namespace paraprobe::defense {

namespace {

constexpr std::uint64_t kAbstractTag = 0x61627374;
constexpr std::uint64_t kParagraphTag = 0x70617261;

std::string paraphrase(std::string_view text, const providers::ProviderSet& p, std::uint64_t seed,
                       const DefenseOptions& options) {
  if (!p.generator) throw Error(ErrorKind::kInvalidConfig, "defense needs a generator");
  auto out = providers::generate(*p.generator, prompts::build_zero_shot_prompt(text), 1, seed, p.retry).front();
  if (!options.filter) return out;
  if (!p.similarity || !p.perplexity) throw Error(ErrorKind::kInvalidConfig, "filtered defense needs scorers");
  const bool sim_ok = p.similarity->similarity(text, out) >= options.tau_sim;
  const bool ppl_ok = p.perplexity->perplexity(out) <= options.alpha_ppl * p.perplexity->perplexity(text);
  return sim_ok && ppl_ok ? out : std::string(text);
}

}  // namespace

doc::PatchResult defend_abstract(const SourceDocument& doc, const providers::ProviderSet& providers,
                                 std::uint64_t seed, const DefenseOptions& options) {
  const auto text = paraphrase(doc.target_text(), providers, derive_seed(seed, {kAbstractTag}), options);
  return doc::apply_patch(doc, text);
}

std::vector<std::size_t> choose_paragraphs(std::size_t count, int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "number of paragraphs must be >= 1");
  if (static_cast<std::size_t>(n) > count) {
    throw Error(ErrorKind::kNotEnoughParagraphs,
                "asked for " + std::to_string(n) + " paragraphs, document has " + std::to_string(count));
  }
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, {kParagraphTag, count}));
  // partial Fisher-Yates
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, count - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

doc::MultiPatchResult defend_random(const SourceDocument& doc, const providers::ProviderSet& providers, int n,
                                    std::uint64_t seed, const DefenseOptions& options) {
  const auto& paragraphs = doc.paragraph_index();
  const auto chosen = choose_paragraphs(paragraphs.size(), n, seed);
  std::vector<ByteRange> ranges;
  for (const auto i : chosen) ranges.push_back(paragraphs[i]);
  std::vector<std::string> replacements(ranges.size());
  parallel_for(ranges.size(), 1, [&](std::size_t k) {
    replacements[k] = paraphrase(ranges[k].slice(doc.source_text()), providers,
                                 derive_seed(seed, {kParagraphTag, static_cast<std::uint64_t>(chosen[k])}), options);
  });
  return doc::apply_patches(doc.source_text(), doc.format(), ranges, replacements);
}

PplDetection detect_by_ppl(const analysis::ReviewPair& pair, const providers::PerplexityScorer& ppl,
                           double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorKind::kInvalidArgument, "threshold must be positive");
  const auto& a = pair.original_review.content;
  const auto& b = pair.attacked_review.content;
  if (a.empty() || b.empty()) throw Error(ErrorKind::kDegenerate, "review content is empty");
  PplDetection d;
  d.ppl_ratio = a == b ? 1.0 : ppl.perplexity(b) / ppl.perplexity(a);
  d.flag = d.ppl_ratio > threshold;
  return d;
}

CorpusPplDetector::CorpusPplDetector(std::vector<double> corpus, double percentile) {
  if (corpus.empty()) throw Error(ErrorKind::kDegenerate, "empty reference corpus");
  if (!(percentile >= 0.0 && percentile <= 100.0)) {
    throw Error(ErrorKind::kInvalidArgument, "percentile must lie in [0, 100]");
  }
  std::sort(corpus.begin(), corpus.end());
  // linear interpolation between closest ranks
  const double pos = percentile / 100.0 * static_cast<double>(corpus.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(corpus.size() - 1, lo + 1);
  threshold_ = corpus[lo] + (pos - static_cast<double>(lo)) * (corpus[hi] - corpus[lo]);
}

SentimentGap detect_by_sentiment_gap(const prompts::ReviewOutput& review, const providers::SentimentScorer& sentiment,
                                     const ScoreScale& scale) {
  const double s = review.content.empty() ? 0.5 : sentiment.sentiment(review.content);
  return {analysis::minmax_normalize(review.score.to_double(), scale) - s};
}

ChangeRate change_rate(double score, double original_score, const ScoreScale& scale) {
  ChangeRate c;
  if (original_score != 0.0) c.ratio = score / original_score;
  c.normalized_difference =
      analysis::minmax_normalize(score, scale) - analysis::minmax_normalize(original_score, scale);
  return c;
}

}  // namespace paraprobe::defense
