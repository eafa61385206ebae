#include "paraprobe/core/config.hpp"

#include <algorithm>
#include <cmath>

#include "paraprobe/core/error.hpp"

namespace paraprobe {

namespace {

template <typename T>
bool in_grid(T value, std::initializer_list<T> grid) {
  return std::any_of(grid.begin(), grid.end(), [&](T g) {
    if constexpr (std::is_floating_point_v<T>) return std::fabs(g - value) < 1e-9;
    return g == value;
  });
}

}  // namespace

std::string_view to_string(IclMode mode) {
  return mode == IclMode::kTopKCumulative ? "top-k-cumulative" : "previous-iteration";
}

IclMode parse_icl_mode(std::string_view name) {
  if (name == "top-k-cumulative") return IclMode::kTopKCumulative;
  if (name == "previous-iteration") return IclMode::kPreviousIteration;
  throw Error(ErrorKind::kInvalidConfig, "unknown icl mode '" + std::string(name) + "'");
}

int SearchConfig::min_successes(int requested) const {
  const int m = static_cast<int>(std::ceil(min_success_fraction * requested - 1e-9));
  return std::clamp(m, 1, std::max(1, requested));
}

std::int64_t SearchConfig::generation_budget() const {
  return static_cast<std::int64_t>(iterations + 1) * candidates_per_step;
}

std::int64_t SearchConfig::review_budget() const {
  return generation_budget() * samples_per_candidate + samples_per_candidate;
}

std::vector<std::string> validate_config(const SearchConfig& c) {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidConfig, what); };
  if (c.candidates_per_step < 1) fail("K must be >= 1");
  if (c.samples_per_candidate < 1) fail("N must be >= 1");
  if (c.iterations < 0) fail("T must be >= 0");
  if (c.parallelism < 1) fail("parallelism must be >= 1");
  if (!(c.tau_sim > 0.0 && c.tau_sim <= 1.0)) fail("tau_sim must lie in (0, 1]");
  if (!(c.alpha_ppl >= 1.0) || !std::isfinite(c.alpha_ppl)) fail("alpha_ppl must be >= 1");
  if (c.init_samples && *c.init_samples < 1) fail("n_init_samples must be >= 1");
  if (!(c.min_success_fraction > 0.0 && c.min_success_fraction <= 1.0)) {
    fail("min_success_fraction must lie in (0, 1]");
  }

  std::vector<std::string> warnings;
  if (!in_grid(c.candidates_per_step, {4, 8, 16})) warnings.emplace_back("K outside searched range {4, 8, 16}");
  if (!in_grid(c.samples_per_candidate, {4, 8, 16})) warnings.emplace_back("N outside searched range {4, 8, 16}");
  if (!in_grid(c.iterations, {16, 32, 64})) warnings.emplace_back("T outside searched range {16, 32, 64}");
  if (!in_grid(c.tau_sim, {0.80, 0.85, 0.90})) {
    warnings.emplace_back("tau_sim outside searched range {0.80, 0.85, 0.90}");
  }
  if (!in_grid(c.alpha_ppl, {1.0, 1.2, 1.5})) warnings.emplace_back("alpha_ppl outside searched range {1.0, 1.2, 1.5}");
  return warnings;
}

nlohmann::json to_json(const SearchConfig& c) {
  nlohmann::json j = {
      {"K", c.candidates_per_step},
      {"N", c.samples_per_candidate},
      {"T", c.iterations},
      {"tau_sim", c.tau_sim},
      {"alpha_ppl", c.alpha_ppl},
      {"seed", c.seed},
      {"parallelism", c.parallelism},
      {"n_init_samples", c.effective_init_samples()},
      {"icl_mode", std::string(to_string(c.icl_mode))},
      {"stop_at_scale_max", c.stop_at_scale_max},
      {"min_success_fraction", c.min_success_fraction},
  };
  return j;
}

SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig c) {
  if (!j.is_object()) throw Error(ErrorKind::kInvalidConfig, "search config must be a JSON object");
  try {
    if (j.contains("K")) c.candidates_per_step = j.at("K").get<int>();
    if (j.contains("N")) c.samples_per_candidate = j.at("N").get<int>();
    if (j.contains("T")) c.iterations = j.at("T").get<int>();
    if (j.contains("tau_sim")) c.tau_sim = j.at("tau_sim").get<double>();
    if (j.contains("alpha_ppl")) c.alpha_ppl = j.at("alpha_ppl").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("parallelism")) c.parallelism = j.at("parallelism").get<int>();
    if (j.contains("n_init_samples")) c.init_samples = j.at("n_init_samples").get<int>();
    if (j.contains("icl_mode")) c.icl_mode = parse_icl_mode(j.at("icl_mode").get<std::string>());
    if (j.contains("stop_at_scale_max")) c.stop_at_scale_max = j.at("stop_at_scale_max").get<bool>();
    if (j.contains("min_success_fraction")) c.min_success_fraction = j.at("min_success_fraction").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, std::string("search config: ") + e.what());
  }
  return c;
}

}  // namespace paraprobe
