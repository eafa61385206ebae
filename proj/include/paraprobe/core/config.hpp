#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace paraprobe {

/// Where ICL examples for a refinement step come from.
enum class IclMode {
  kTopKCumulative,     // K best entries of the whole pool
  kPreviousIteration,  // every pool entry of the latest non-empty iteration
};

std::string_view to_string(IclMode mode);
IclMode parse_icl_mode(std::string_view name);

struct SearchConfig {
  int candidates_per_step = 8;       // K
  int samples_per_candidate = 8;     // N
  int iterations = 32;               // T
  double tau_sim = 0.85;
  double alpha_ppl = 1.2;
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::optional<int> init_samples;   // defaults to N
  IclMode icl_mode = IclMode::kTopKCumulative;
  bool stop_at_scale_max = false;
  /// Minimum successful review samples per candidate, as a fraction of the
  /// requested count (rounded up).
  double min_success_fraction = 0.5;

  int effective_init_samples() const { return init_samples.value_or(samples_per_candidate); }
  int min_successes(int requested) const;

  /// (T+1)·K
  std::int64_t generation_budget() const;
  /// (T+1)·K·N + N, the reviewer-call ceiling including the original score.
  std::int64_t review_budget() const;
};

/// Hard-fails with Error(kInvalidConfig) on invariant violations; returns one
/// warning per field that lies outside the tuned hyperparameter grid.
std::vector<std::string> validate_config(const SearchConfig& config);

nlohmann::json to_json(const SearchConfig& config);
/// Missing keys keep their defaults. Accepts "K"/"N"/"T" shorthands.
SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig base = {});

}  // namespace paraprobe
