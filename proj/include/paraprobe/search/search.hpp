#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "paraprobe/core/config.hpp"
#include "paraprobe/core/score_scale.hpp"
#include "paraprobe/core/trajectory.hpp"
#include "paraprobe/core/types.hpp"
#include "paraprobe/document/document.hpp"
#include "paraprobe/prompts/prompts.hpp"
#include "paraprobe/providers/providers.hpp"

namespace paraprobe::search {

/// Everything needed to turn a document into a score.
struct ReviewSetup {
  std::string reviewer_prompt;
  prompts::ReviewerTemplate tmpl;
  ScoreScale scale;
  prompts::ParseOptions parse;
  doc::CompileHook compile;
  /// Patched sources go under this directory when the compile hook is set.
  std::string work_dir = "paraprobe-work";

  /// Template inferred from the prompt's score marker.
  ReviewSetup(std::string reviewer_prompt, ScoreScale scale);
  ReviewSetup(std::string reviewer_prompt, prompts::ReviewerTemplate tmpl, ScoreScale scale);
};

struct SearchResult {
  ScoredCandidate best;
  CandidatePool pool;
  Trajectory trajectory;
  double original_mean_score = 0.0;

  double improvement() const { return best.mean_score - original_mean_score; }
};

nlohmann::json to_json(const SearchResult& result, const std::string& trajectory_path = "");

/// Similarity and perplexity-ratio constraint. `ppl_original` is PPL(x),
/// computed by the caller once per run.
FilterVerdict apply_filter(std::string_view original, std::string_view candidate_text, const SearchConfig& config,
                           const providers::ProviderSet& providers, double ppl_original);
FilterVerdict apply_filter(std::string_view original, std::string_view candidate_text, const SearchConfig& config,
                           const providers::ProviderSet& providers);

struct SampleScores {
  std::vector<Rational> raw_scores;  // successful samples, in sample order
  double mean = 0.0;
  int failed = 0;
  int multi_marker = 0;
};

/// Where a batch of review samples sits inside a run; feeds seed derivation.
struct SampleCoords {
  std::uint64_t run_seed = 0;
  int iteration = -1;  // -1 is the original document
  int index = 0;
};

/// Patches `candidate_text` into the document and collects `n_samples`
/// reviews. Failed samples (after retries) are dropped; throws
/// Error(kBelowMinimumSuccesses) when fewer than `min_successes` remain.
SampleScores score_candidate(const SourceDocument& doc, std::string_view candidate_text, int n_samples,
                             const providers::ProviderSet& providers, const ReviewSetup& setup,
                             const SampleCoords& coords, int min_successes, int parallelism = 1);

/// ICL examples for the next refinement step, best first.
/// Throws Error(kEmptyPool) when the pool is empty.
std::vector<ScoredCandidate> select_icl_examples(const CandidatePool& pool, int count, IclMode mode);

struct SearchHooks {
  TrajectorySink* sink = nullptr;
};

/// Init step plus T refinement iterations; returns the pool argmax.
SearchResult run_search(const SourceDocument& doc, const SearchConfig& config, const providers::ProviderSet& providers,
                        const ReviewSetup& setup, SearchHooks hooks = {});
SearchResult run_search(const SourceDocument& doc, const SearchConfig& config, const providers::ProviderSet& providers,
                        const std::string& reviewer_prompt, const ScoreScale& scale);

/// Zero-shot sampling with the same filter and scoring, in batches of K
/// until `budget` generation attempts are spent. Batch b is recorded as
/// iteration b.
SearchResult paraphrase_baseline(const SourceDocument& doc, std::int64_t budget, const SearchConfig& config,
                                 const providers::ProviderSet& providers, const ReviewSetup& setup,
                                 SearchHooks hooks = {});

/// Stable identifier of a run: hash of seed, document and config.
std::string make_run_id(const SourceDocument& doc, const SearchConfig& config, std::string_view kind);

}  // namespace paraprobe::search
