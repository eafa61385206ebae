#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "paraprobe/core/config.hpp"
#include "paraprobe/core/rational.hpp"
#include "paraprobe/core/types.hpp"

namespace paraprobe {

enum class VerdictKind {
  kPass,
  kFilteredSimilarity,
  kFilteredPerplexity,
  kFilteredBoth,
  kScoreError,
};

/// "pass", "filtered: similarity", "filtered: perplexity",
/// "filtered: similarity+perplexity", "score-error".
std::string_view verdict_label(VerdictKind kind);

struct FilterVerdict {
  VerdictKind kind = VerdictKind::kPass;
  double similarity = 0.0;
  double ppl_ratio = 1.0;

  bool passed() const noexcept { return kind == VerdictKind::kPass; }
};

struct CandidateRecord {
  Candidate candidate;
  FilterVerdict verdict;
  std::vector<Rational> raw_scores;
  std::optional<double> mean_score;
  int failed_samples = 0;
  int multi_marker_samples = 0;
};

/// Audit log of one search run.
struct Trajectory {
  std::string run_id;
  SearchConfig config;
  std::vector<Rational> original_raw_scores;
  double original_mean_score = 0.0;
  std::vector<CandidateRecord> records;
  std::vector<double> best_so_far;        // one entry per completed iteration
  std::vector<int> generation_attempts;   // one entry per iteration
  std::int64_t reviewer_calls = 0;        // logical samples requested, retries excluded
  std::vector<std::string> notes;

  std::int64_t total_generation_attempts() const;
};

nlohmann::json to_json(const CandidateRecord& record);
nlohmann::json to_json(const Trajectory& trajectory);

/// Receives records as they are produced. Called from the engine's single
/// writer only.
class TrajectorySink {
 public:
  virtual ~TrajectorySink() = default;
  virtual void on_original(const std::string& run_id, const std::vector<Rational>& raw_scores, double mean,
                           const std::string& text) = 0;
  virtual void on_record(const std::string& run_id, const CandidateRecord& record) = 0;
  virtual void on_iteration_end(const std::string& run_id, int iteration, double best_so_far) = 0;
};

/// Line-delimited JSON trajectory log plus a sidecar JSON object holding full
/// texts keyed by text_hash. The sidecar is rewritten at each iteration
/// barrier so a crashed run keeps everything up to the last finished step.
class TrajectoryLog final : public TrajectorySink {
 public:
  TrajectoryLog(std::string log_path, std::string sidecar_path);

  void on_original(const std::string& run_id, const std::vector<Rational>& raw_scores, double mean,
                   const std::string& text) override;
  void on_record(const std::string& run_id, const CandidateRecord& record) override;
  void on_iteration_end(const std::string& run_id, int iteration, double best_so_far) override;

  const std::string& log_path() const noexcept { return log_path_; }
  const std::string& sidecar_path() const noexcept { return sidecar_path_; }

 private:
  void write_line(const nlohmann::json& line);
  void flush_sidecar();

  std::string log_path_;
  std::string sidecar_path_;
  std::ofstream log_;
  std::map<std::string, std::string> texts_;
  std::mutex mu_;
};

/// Current UTC time, ISO-8601 with milliseconds.
std::string utc_timestamp();

}  // namespace paraprobe
