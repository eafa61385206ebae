#include "paraprobe/core/trajectory.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"

namespace paraprobe {

std::string_view verdict_label(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kPass: return "pass";
    case VerdictKind::kFilteredSimilarity: return "filtered: similarity";
    case VerdictKind::kFilteredPerplexity: return "filtered: perplexity";
    case VerdictKind::kFilteredBoth: return "filtered: similarity+perplexity";
    case VerdictKind::kScoreError: return "score-error";
  }
  return "unknown";
}

std::int64_t Trajectory::total_generation_attempts() const {
  std::int64_t total = 0;
  for (const int a : generation_attempts) total += a;
  return total;
}

namespace {

nlohmann::json scores_json(const std::vector<Rational>& scores) {
  auto arr = nlohmann::json::array();
  for (const auto& s : scores) arr.push_back(s.to_double());
  return arr;
}

}  // namespace

nlohmann::json to_json(const CandidateRecord& r) {
  nlohmann::json j = {
      {"iteration", r.candidate.iteration},
      {"index", r.candidate.index},
      {"text_hash", text_hash(r.candidate.text)},
      {"verdict", std::string(verdict_label(r.verdict.kind))},
      {"similarity", r.verdict.similarity},
      {"ppl_ratio", r.verdict.ppl_ratio},
      {"raw_scores", scores_json(r.raw_scores)},
      {"mean_score", r.mean_score ? nlohmann::json(*r.mean_score) : nlohmann::json(nullptr)},
      {"parent_examples", r.candidate.parent_examples},
      {"failed_samples", r.failed_samples},
  };
  if (r.multi_marker_samples > 0) j["multi_marker_samples"] = r.multi_marker_samples;
  return j;
}

nlohmann::json to_json(const Trajectory& t) {
  auto records = nlohmann::json::array();
  for (const auto& r : t.records) {
    auto j = to_json(r);
    j["text"] = r.candidate.text;
    records.push_back(std::move(j));
  }
  return {
      {"run_id", t.run_id},
      {"config", to_json(t.config)},
      {"original_raw_scores", scores_json(t.original_raw_scores)},
      {"original_mean_score", t.original_mean_score},
      {"records", std::move(records)},
      {"best_so_far", t.best_so_far},
      {"generation_attempts", t.generation_attempts},
      {"reviewer_calls", t.reviewer_calls},
      {"notes", t.notes},
  };
}

TrajectoryLog::TrajectoryLog(std::string log_path, std::string sidecar_path)
    : log_path_(std::move(log_path)), sidecar_path_(std::move(sidecar_path)) {
  const std::filesystem::path p(log_path_);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  log_.open(log_path_, std::ios::out | std::ios::trunc);
  if (!log_) throw Error(ErrorKind::kIo, "cannot open trajectory log '" + log_path_ + "'");
}

void TrajectoryLog::write_line(const nlohmann::json& line) {
  log_ << line.dump() << '\n';
  log_.flush();
}

void TrajectoryLog::on_original(const std::string& run_id, const std::vector<Rational>& raw_scores, double mean,
                                const std::string& text) {
  std::lock_guard lock(mu_);
  texts_[text_hash(text)] = text;
  write_line({{"run_id", run_id},
              {"iteration", -1},
              {"index", 0},
              {"text_hash", text_hash(text)},
              {"verdict", "original"},
              {"similarity", 1.0},
              {"ppl_ratio", 1.0},
              {"raw_scores", scores_json(raw_scores)},
              {"mean_score", mean},
              {"timestamp", utc_timestamp()}});
}

void TrajectoryLog::on_record(const std::string& run_id, const CandidateRecord& record) {
  std::lock_guard lock(mu_);
  texts_[text_hash(record.candidate.text)] = record.candidate.text;
  auto j = to_json(record);
  j["run_id"] = run_id;
  j["timestamp"] = utc_timestamp();
  write_line(j);
}

void TrajectoryLog::on_iteration_end(const std::string&, int, double) {
  std::lock_guard lock(mu_);
  flush_sidecar();
}

void TrajectoryLog::flush_sidecar() {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [hash, text] : texts_) j[hash] = text;
  write_file(sidecar_path_, j.dump(2) + "\n");
}

std::string utc_timestamp() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t tt = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[40];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

}  // namespace paraprobe
