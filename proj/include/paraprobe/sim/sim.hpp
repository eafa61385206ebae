#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "paraprobe/core/config.hpp"
#include "paraprobe/prompts/prompts.hpp"
#include "paraprobe/providers/mock.hpp"

namespace paraprobe::sim {

/// Synonym groups and the hidden reviewer weights of the simulated world.
/// The first member of each group is the plain word used in unattacked
/// abstracts.
struct World {
  providers::Lexicon lexicon;
  std::map<std::string, double> weights;
};
const World& default_world();

/// LaTeX paper with an abstract of plain-word sentences and a body that uses
/// every lexicon word at least once.
std::string synthetic_document(int index, std::uint64_t seed);

struct SuiteConfig {
  int documents = 20;
  int seeds = 20;
  std::uint64_t base_seed = 0;
  SearchConfig search;  // K, N, T and filter thresholds
  std::string conference = "acl";
  prompts::TemplateId template_id = prompts::TemplateId::kDelimiters;
  double base_score = 1.8;
  double weight_scale = 0.8;  // multiplies every hidden weight
  double noise_sd = 0.5;
  double context_coupling = 0.6;
  double body_weight = 0.05;
  providers::MockGenerator::Options generator;
  bool run_defenses = true;
  int random_max_n = 10;
  bool run_detection = true;

  SuiteConfig();
};

/// Hidden reviewer of the suite: the world's weights scaled by
/// `weight_scale`, plus the suite's noise and context settings.
providers::MockReviewerSpec reviewer_spec(const SuiteConfig& config);

SuiteConfig suite_config_from_json(const nlohmann::json& j, SuiteConfig base = {});
nlohmann::json to_json(const SuiteConfig& config);

/// One (document, seed) cell of the suite. Scores are fresh N-sample means
/// of the final texts, not the search's own estimates.
struct RunOutcome {
  int document = 0;
  int seed = 0;
  double original = 0.0;
  double baseline = 0.0;
  double paa = 0.0;
  double paa_search_mean = 0.0;  // best.mean_score as seen by the search
  std::optional<double> defended_abst;
  std::vector<double> defended_random;  // index n-1
  std::vector<double> paa_best_so_far;
  std::vector<double> baseline_best_so_far;
  std::int64_t paa_generation_attempts = 0;
  std::int64_t baseline_generation_attempts = 0;
  std::int64_t paa_reviewer_calls = 0;
  std::int64_t baseline_reviewer_calls = 0;
  int pool_entries_checked = 0;
  int filter_violations = 0;
  int filtered_candidates = 0;
  std::optional<double> unattacked_ppl_ratio;
  std::optional<double> attacked_ppl_ratio;
  std::optional<double> sentiment_ratio;
  std::optional<double> content_similarity;
};

struct SuiteResult {
  SuiteConfig config;
  std::vector<RunOutcome> runs;
};

using Progress = std::function<void(int done, int total)>;
SuiteResult run_suite(const SuiteConfig& config, const Progress& progress = {});

/// Aggregates used by the checks and the report.
struct SuiteSummary {
  double mean_original = 0.0;
  double mean_baseline = 0.0;
  double mean_paa = 0.0;
  double paa_beats_baseline = 0.0;  // fraction of runs
  std::optional<double> mean_defended_abst;
  double abst_between_fraction = 0.0;  // fraction of seeds
  std::vector<double> random_advantage;  // suite mean of defended_random(n) - original
  std::optional<double> random_rho;
  std::optional<double> random_rho_p;
  std::optional<double> detection_auc;
  int filter_violations = 0;
  int monotonicity_violations = 0;
  int budget_violations = 0;
};
SuiteSummary summarize(const SuiteResult& result);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<Check> suite_checks(const SuiteResult& result, const SuiteSummary& summary);

/// Writes table.txt, summary.json, runs.csv, best_so_far.csv, defense.csv,
/// detection.csv and records.json under `dir`. Contents depend only on the
/// result, so identical suites give identical files.
void write_suite_outputs(const SuiteResult& result, const std::string& dir);

}  // namespace paraprobe::sim
