#include "paraprobe/search/search.hpp"

#include <algorithm>
#include <filesystem>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"

namespace paraprobe::search {

namespace {

constexpr std::uint64_t kGenerateTag = 0x67656e;
constexpr std::uint64_t kReviewTag = 0x726576;
constexpr std::uint64_t kBaselineTag = 0x62617365;

nlohmann::json scores_json(const std::vector<Rational>& scores) {
  auto arr = nlohmann::json::array();
  for (const auto& s : scores) arr.push_back(s.to_double());
  return arr;
}

nlohmann::json candidate_json(const ScoredCandidate& c) {
  return {
      {"id", c.candidate.id()},
      {"iteration", c.candidate.iteration},
      {"index", c.candidate.index},
      {"text", c.candidate.text},
      {"text_hash", text_hash(c.candidate.text)},
      {"similarity", c.similarity},
      {"ppl_ratio", c.ppl_ratio},
      {"raw_scores", scores_json(c.raw_scores)},
      {"mean_score", c.mean_score},
      {"parent_examples", c.candidate.parent_examples},
  };
}

std::vector<std::string> generate_or_exhaust(const providers::ProviderSet& p, const std::string& prompt, int count,
                                             std::uint64_t seed, int iteration) {
  try {
    return providers::generate(*p.generator, prompt, count, seed, p.retry);
  } catch (const Error& e) {
    if (!e.is_provider_error()) throw;
    throw Error(ErrorKind::kProviderExhausted,
                "generator failed at iteration " + std::to_string(iteration) + ": " + e.what());
  }
}

/// Shared state of one run: pool, trajectory, and the per-iteration
/// filter-then-score step.
class Engine {
 public:
  Engine(const SourceDocument& doc, const SearchConfig& config, const providers::ProviderSet& providers,
         const ReviewSetup& setup, SearchHooks hooks, std::string_view kind)
      : doc_(doc),
        config_(config),
        p_(providers),
        setup_(setup),
        hooks_(hooks),
        original_(doc.target_text()),
        pool_(config.tau_sim, config.alpha_ppl) {
    p_.require_core();
    for (auto& w : validate_config(config_)) traj_.notes.push_back("config warning: " + w);
    traj_.run_id = make_run_id(doc, config, kind);
    traj_.config = config_;
    ppl_original_ = p_.perplexity->perplexity(original_);
  }

  void score_original() {
    const int n = config_.samples_per_candidate;
    auto s = score_candidate(doc_, original_, n, p_, setup_, {config_.seed, -1, 0}, config_.min_successes(n),
                             config_.parallelism);
    traj_.reviewer_calls += n;
    traj_.original_raw_scores = s.raw_scores;
    traj_.original_mean_score = s.mean;
    if (s.failed > 0) traj_.notes.push_back("original: " + std::to_string(s.failed) + " failed samples");
    if (hooks_.sink) hooks_.sink->on_original(traj_.run_id, s.raw_scores, s.mean, original_);
  }

  /// Filters, scores and pools one batch of generated texts.
  void process(int iteration, const std::vector<std::string>& texts, const std::vector<std::string>& parents,
               int n_samples) {
    const auto count = texts.size();
    traj_.generation_attempts.push_back(static_cast<int>(count));
    std::vector<CandidateRecord> records(count);
    const int min_ok = config_.min_successes(n_samples);

    parallel_for(count, config_.parallelism, [&](std::size_t k) {
      auto& r = records[k];
      r.candidate = Candidate{texts[k], iteration, static_cast<int>(k) + 1, parents};
      r.verdict = apply_filter(original_, texts[k], config_, p_, ppl_original_);
      if (!r.verdict.passed()) return;
      try {
        auto s = score_candidate(doc_, texts[k], n_samples, p_, setup_,
                                 {config_.seed, iteration, static_cast<int>(k) + 1}, min_ok, 1);
        r.raw_scores = std::move(s.raw_scores);
        r.mean_score = s.mean;
        r.failed_samples = s.failed;
        r.multi_marker_samples = s.multi_marker;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kBelowMinimumSuccesses && e.kind() != ErrorKind::kCompileFailed) throw;
        r.verdict.kind = VerdictKind::kScoreError;
        r.failed_samples = n_samples;
      }
    });

    for (auto& r : records) {
      if (r.verdict.passed() || r.verdict.kind == VerdictKind::kScoreError) traj_.reviewer_calls += n_samples;
      if (r.verdict.kind == VerdictKind::kScoreError) {
        any_score_error_ = true;
        traj_.notes.push_back(r.candidate.id() + ": scoring failed");
      } else if (r.failed_samples > 0) {
        traj_.notes.push_back(r.candidate.id() + ": " + std::to_string(r.failed_samples) + " failed samples dropped");
      }
      if (r.verdict.passed()) {
        pool_.append(ScoredCandidate{r.candidate, r.verdict.similarity, r.verdict.ppl_ratio, r.raw_scores,
                                     *r.mean_score});
      }
      if (hooks_.sink) hooks_.sink->on_record(traj_.run_id, r);
      traj_.records.push_back(std::move(r));
    }
  }

  void require_nonempty_pool(const std::string& stage) const {
    if (!pool_.empty()) return;
    if (any_score_error_) {
      throw Error(ErrorKind::kProviderExhausted, stage + ": every surviving candidate failed to score");
    }
    int sim = 0;
    int ppl = 0;
    for (const auto& r : traj_.records) {
      if (r.verdict.kind == VerdictKind::kFilteredSimilarity || r.verdict.kind == VerdictKind::kFilteredBoth) ++sim;
      if (r.verdict.kind == VerdictKind::kFilteredPerplexity || r.verdict.kind == VerdictKind::kFilteredBoth) ++ppl;
    }
    throw Error(ErrorKind::kAllCandidatesFiltered,
                stage + ": all " + std::to_string(traj_.records.size()) + " candidates filtered (" +
                    std::to_string(sim) + " below similarity threshold, " + std::to_string(ppl) +
                    " above perplexity ratio)");
  }

  void end_iteration(int iteration) {
    const double best = pool_.best().mean_score;
    traj_.best_so_far.push_back(best);
    if (hooks_.sink) hooks_.sink->on_iteration_end(traj_.run_id, iteration, best);
  }

  bool at_scale_max() const {
    return config_.stop_at_scale_max && !pool_.empty() && pool_.best().mean_score >= setup_.scale.max().to_double();
  }

  SearchResult finish() {
    SearchResult r{pool_.best(), std::move(pool_), std::move(traj_), 0.0};
    r.original_mean_score = r.trajectory.original_mean_score;
    return r;
  }

  const CandidatePool& pool() const { return pool_; }
  Trajectory& trajectory() { return traj_; }
  const std::string& original() const { return original_; }

 private:
  const SourceDocument& doc_;
  const SearchConfig& config_;
  const providers::ProviderSet& p_;
  const ReviewSetup& setup_;
  SearchHooks hooks_;
  std::string original_;
  double ppl_original_ = 1.0;
  CandidatePool pool_;
  Trajectory traj_;
  bool any_score_error_ = false;
};

}  // namespace

ReviewSetup::ReviewSetup(std::string prompt, ScoreScale s)
    : ReviewSetup(prompt, prompts::builtin_template(prompts::detect_template(prompt)), std::move(s)) {}

ReviewSetup::ReviewSetup(std::string prompt, prompts::ReviewerTemplate t, ScoreScale s)
    : reviewer_prompt(std::move(prompt)), tmpl(std::move(t)), scale(std::move(s)) {}

nlohmann::json to_json(const SearchResult& result, const std::string& trajectory_path) {
  nlohmann::json j = {
      {"run_id", result.trajectory.run_id},
      {"best", candidate_json(result.best)},
      {"original_mean_score", result.original_mean_score},
      {"original_raw_scores", scores_json(result.trajectory.original_raw_scores)},
      {"improvement", result.improvement()},
      {"pool_size", result.pool.size()},
      {"generation_attempts", result.trajectory.total_generation_attempts()},
      {"reviewer_calls", result.trajectory.reviewer_calls},
      {"best_so_far", result.trajectory.best_so_far},
      {"config", to_json(result.trajectory.config)},
      {"notes", result.trajectory.notes},
  };
  if (!trajectory_path.empty()) j["trajectory_path"] = trajectory_path;
  return j;
}

FilterVerdict apply_filter(std::string_view original, std::string_view candidate_text, const SearchConfig& config,
                           const providers::ProviderSet& providers, double ppl_original) {
  if (original.empty() || candidate_text.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "filter needs two non-empty texts");
  }
  FilterVerdict v;
  v.similarity = providers.similarity->similarity(original, candidate_text);
  v.ppl_ratio = candidate_text == original ? 1.0 : providers.perplexity->perplexity(candidate_text) / ppl_original;
  const bool sim_ok = v.similarity >= config.tau_sim;
  const bool ppl_ok = v.ppl_ratio <= config.alpha_ppl;
  if (sim_ok && ppl_ok) {
    v.kind = VerdictKind::kPass;
  } else if (!sim_ok && !ppl_ok) {
    v.kind = VerdictKind::kFilteredBoth;
  } else {
    v.kind = sim_ok ? VerdictKind::kFilteredPerplexity : VerdictKind::kFilteredSimilarity;
  }
  return v;
}

FilterVerdict apply_filter(std::string_view original, std::string_view candidate_text, const SearchConfig& config,
                           const providers::ProviderSet& providers) {
  if (original.empty()) throw Error(ErrorKind::kInvalidArgument, "filter needs two non-empty texts");
  return apply_filter(original, candidate_text, config, providers, providers.perplexity->perplexity(original));
}

SampleScores score_candidate(const SourceDocument& doc, std::string_view candidate_text, int n_samples,
                             const providers::ProviderSet& providers, const ReviewSetup& setup,
                             const SampleCoords& coords, int min_successes, int parallelism) {
  if (n_samples < 1) throw Error(ErrorKind::kInvalidArgument, "n_samples must be >= 1");
  const auto patch = doc::apply_patch(doc, candidate_text);

  std::optional<std::string> attachment;
  if (setup.compile.configured()) {
    const auto dir = std::filesystem::path(setup.work_dir) / text_hash(patch.patched_text);
    const auto source = (dir / (doc.format() == DocumentFormat::kLatex ? "paper.tex" : "paper.txt")).string();
    write_file(source, patch.patched_text);
    attachment = doc::compile_hook(source, setup.compile);
  }

  struct Slot {
    std::optional<prompts::ReviewOutput> out;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(n_samples));
  parallel_for(slots.size(), parallelism, [&](std::size_t s) {
    providers::ReviewRequest req;
    req.document_text = patch.patched_text;
    req.reviewer_prompt = setup.reviewer_prompt;
    req.attachment_path = attachment;
    req.iteration = coords.iteration;
    req.index = coords.index;
    req.sample = static_cast<int>(s);
    req.seed = derive_seed(coords.run_seed, {kReviewTag, static_cast<std::uint64_t>(coords.iteration + 1),
                                             static_cast<std::uint64_t>(coords.index), s});
    try {
      slots[s].out = providers::review(*providers.reviewer, req, setup.tmpl, setup.scale, providers.retry, setup.parse);
    } catch (const Error& e) {
      if (!e.is_provider_error()) throw;
    }
  });

  SampleScores result;
  for (const auto& slot : slots) {
    if (!slot.out) {
      ++result.failed;
      continue;
    }
    result.raw_scores.push_back(slot.out->score);
    if (slot.out->marker_occurrences > 1) ++result.multi_marker;
  }
  const int ok = static_cast<int>(result.raw_scores.size());
  if (ok < min_successes) {
    throw Error(ErrorKind::kBelowMinimumSuccesses,
                std::to_string(ok) + " of " + std::to_string(n_samples) + " review samples succeeded, " +
                    std::to_string(min_successes) + " required");
  }
  result.mean = mean_of(result.raw_scores);
  return result;
}

std::vector<ScoredCandidate> select_icl_examples(const CandidatePool& pool, int count, IclMode mode) {
  if (pool.empty()) throw Error(ErrorKind::kEmptyPool, "no ICL examples in an empty pool");
  if (count < 1) throw Error(ErrorKind::kInvalidArgument, "ICL example count must be >= 1");
  if (mode == IclMode::kTopKCumulative) return pool.top(static_cast<std::size_t>(count));
  auto latest = pool.from_iteration(pool.latest_iteration());
  std::sort(latest.begin(), latest.end(), ranks_before);
  return latest;
}

std::string make_run_id(const SourceDocument& doc, const SearchConfig& config, std::string_view kind) {
  std::string key(kind);
  key += '|';
  key += std::to_string(config.seed);
  key += '|';
  key += text_hash(doc.source_text());
  key += '|';
  key += to_json(config).dump();
  return std::string(kind) + "-" + text_hash(key);
}

SearchResult run_search(const SourceDocument& doc, const SearchConfig& config, const providers::ProviderSet& providers,
                        const ReviewSetup& setup, SearchHooks hooks) {
  Engine e(doc, config, providers, setup, hooks, "paa");
  e.score_original();

  const int k = config.candidates_per_step;
  const auto init = generate_or_exhaust(providers, prompts::build_zero_shot_prompt(e.original()), k,
                                        derive_seed(config.seed, {kGenerateTag, 0}), 0);
  e.process(0, init, {}, config.effective_init_samples());
  e.require_nonempty_pool("init");
  e.end_iteration(0);

  for (int t = 1; t <= config.iterations; ++t) {
    if (e.at_scale_max()) {
      e.trajectory().notes.push_back("stopped before iteration " + std::to_string(t) + ": best at scale max");
      break;
    }
    const auto examples = select_icl_examples(e.pool(), k, config.icl_mode);
    if (config.icl_mode == IclMode::kPreviousIteration && e.pool().latest_iteration() != t - 1) {
      e.trajectory().notes.push_back("iteration " + std::to_string(t) + ": ICL examples from iteration " +
                                     std::to_string(e.pool().latest_iteration()));
    }
    std::vector<prompts::IclExample> icl;
    std::vector<std::string> parents;
    for (const auto& ex : examples) {
      icl.push_back({ex.candidate.text, ex.mean_score});
      parents.push_back(ex.candidate.id());
    }
    const auto texts = generate_or_exhaust(providers, prompts::build_icl_prompt(e.original(), icl), k,
                                           derive_seed(config.seed, {kGenerateTag, static_cast<std::uint64_t>(t)}), t);
    e.process(t, texts, parents, config.samples_per_candidate);
    e.end_iteration(t);
  }
  return e.finish();
}

SearchResult run_search(const SourceDocument& doc, const SearchConfig& config, const providers::ProviderSet& providers,
                        const std::string& reviewer_prompt, const ScoreScale& scale) {
  return run_search(doc, config, providers, ReviewSetup(reviewer_prompt, scale));
}

SearchResult paraphrase_baseline(const SourceDocument& doc, std::int64_t budget, const SearchConfig& config,
                                 const providers::ProviderSet& providers, const ReviewSetup& setup, SearchHooks hooks) {
  if (budget < 1) throw Error(ErrorKind::kInvalidArgument, "baseline budget must be >= 1");
  Engine e(doc, config, providers, setup, hooks, "baseline");
  e.score_original();

  const auto prompt = prompts::build_zero_shot_prompt(e.original());
  std::int64_t remaining = budget;
  for (int b = 0; remaining > 0; ++b) {
    const int count = static_cast<int>(std::min<std::int64_t>(remaining, config.candidates_per_step));
    remaining -= count;
    const auto texts = generate_or_exhaust(
        providers, prompt, count, derive_seed(config.seed, {kBaselineTag, static_cast<std::uint64_t>(b)}), b);
    e.process(b, texts, {}, b == 0 ? config.effective_init_samples() : config.samples_per_candidate);
    // best_so_far starts with the first batch that pools anything
    if (e.pool().empty()) continue;
    e.end_iteration(b);
    if (e.at_scale_max()) break;
  }
  e.require_nonempty_pool("baseline");
  return e.finish();
}

}  // namespace paraprobe::search
