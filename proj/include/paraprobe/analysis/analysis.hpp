#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "paraprobe/core/score_scale.hpp"
#include "paraprobe/prompts/prompts.hpp"
#include "paraprobe/providers/providers.hpp"

namespace paraprobe::analysis {

/// (s - min) / (max - min). Throws Error(kOutOfRange) outside the scale.
double minmax_normalize(double score, const ScoreScale& scale);

// ---------------------------------------------------------------------------
// Tests and fits

struct WilcoxonResult {
  int n = 0;             // non-zero differences
  double w_plus = 0.0;   // sum of ranks of positive differences
  double w_minus = 0.0;
  double p_value = 1.0;  // two-sided
  bool exact = false;
};

/// Two-sided signed-rank test. Zero differences are dropped and tied
/// magnitudes get average ranks. The null distribution is computed exactly
/// for n <= exact_max_n, otherwise by the normal approximation with
/// continuity and tie correction. Throws Error(kAllZeroDiffs) when nothing is
/// left after dropping zeros.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, int exact_max_n = 25);

struct SpearmanResult {
  int n = 0;
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
  bool exact = false;
};

/// Rank correlation with average ranks for ties. p is an exact permutation
/// p-value for n <= 10 and a Student-t approximation above. Throws
/// Error(kDegenerate) for n < 3 or a constant input.
SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Area under the ROC curve of `positives` against `negatives`, counting ties
/// as one half.
double auc(const std::vector<double>& positives, const std::vector<double>& negatives);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit ols(const std::vector<double>& x, const std::vector<double>& y);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Run records

/// "original", "paraphrase", "paa", "defended-abst", "defended-random(n)",
/// "actual" (a human review score).
bool is_known_condition(const std::string& condition);

struct RunRecord {
  std::string paper_id;
  std::string conference;
  std::string attacker_id;
  std::string optimizer_reviewer_id;
  std::string evaluator_reviewer_id;
  std::string condition;
  double mean_score = 0.0;
};

nlohmann::json to_json(const RunRecord& record);
/// Accepts a JSON array of records or an object with a "records" array.
/// Keys: paper_id, conference, attacker, optimizer, evaluator, condition,
/// score. Scores are checked against the conference's scale when the
/// conference is a builtin one. Throws Error(kMalformedRecords).
std::vector<RunRecord> records_from_json(const nlohmann::json& j);
std::vector<RunRecord> load_records(const std::string& path);

struct SelfPreferenceRow {
  std::string attacker;
  double matched_delta = 0.0;
  std::optional<double> mismatched_delta;  // absent when no other evaluator scored this attacker
  int matched_pairs = 0;
  int mismatched_evaluators = 0;
};

/// Per attacker: mean(paa - original) where the evaluator is the attacker
/// itself, and the unweighted mean over the other evaluators of the same
/// per-evaluator mean. Differences pair records by (paper, evaluator).
/// Throws Error(kMissingBaseline) when a paa record has no original
/// counterpart, Error(kMalformedRecords) when there are no paa records.
std::vector<SelfPreferenceRow> self_preference_table(const std::vector<RunRecord>& records);

/// Mean paa score per (optimizer, evaluator), plus an "original" row of mean
/// original scores per evaluator. Absent cells stay absent and are listed in
/// `missing`.
struct TransferMatrix {
  std::vector<std::string> optimizers;
  std::vector<std::string> evaluators;
  std::map<std::pair<std::string, std::string>, double> cells;
  std::map<std::string, double> original;
  std::vector<std::pair<std::string, std::string>> missing;

  std::optional<double> cell(const std::string& optimizer, const std::string& evaluator) const;
  /// Mean of the row's present cells whose evaluator differs from `optimizer`.
  std::optional<double> off_diagonal_mean(const std::string& optimizer) const;
};
TransferMatrix transfer_matrix(const std::vector<RunRecord>& records);

struct GapRow {
  std::string condition;  // "original", "paraphrase", or "paa:<attacker>"
  double mean_difference = 0.0;
  int pairs = 0;
  std::optional<double> p_vs_actual;
  std::optional<double> p_vs_original;
  std::optional<double> p_vs_paraphrase;
};
struct GapReport {
  std::vector<GapRow> rows;
  std::vector<std::string> warnings;
};
/// mean(llm - actual) per condition, pairing each reviewer score with the
/// "actual" record of the same paper. Unpaired records are dropped with a
/// warning. Wilcoxon p-values compare the per-paper differences against zero
/// and against the original / paraphrase rows.
GapReport actual_review_gap(const std::vector<RunRecord>& records);

// ---------------------------------------------------------------------------
// Review content

struct ReviewPair {
  prompts::ReviewOutput original_review;
  prompts::ReviewOutput attacked_review;
};

struct ReviewDivergence {
  std::optional<double> sentiment_ratio;  // undefined when sentiment(original) is 0
  double semantic_similarity = 0.0;
  double ppl_ratio = 1.0;
};
ReviewDivergence review_divergence(const ReviewPair& pair, const providers::ProviderSet& providers);

// ---------------------------------------------------------------------------
// Output helpers

/// Space-aligned text table.
std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);
std::string fixed(double value, int decimals);
nlohmann::json to_json(const std::vector<SelfPreferenceRow>& rows);
nlohmann::json to_json(const TransferMatrix& matrix);
nlohmann::json to_json(const GapReport& report);

}  // namespace paraprobe::analysis
