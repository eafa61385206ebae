#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "paraprobe/core/score_scale.hpp"

namespace paraprobe::prompts {

/// Review configuration of one venue: the criteria the reviewer fills in, the
/// guideline prose, and the scale of the field used as the final score.
struct ConferenceConfig {
  std::string id;    // short key, e.g. "acl"
  std::string name;  // display name interpolated into prompts, e.g. "ACL 2025"
  std::vector<std::string> criteria;
  std::string guideline_text;
  ScoreScale scale;
  std::string score_field_name;

  /// Throws Error(kInvalidConfig) when criteria are empty or do not contain
  /// the score field.
  void validate() const;
};

/// The five venues shipped with the tool, keyed "acl", "neurips", "icml",
/// "iclr", "aaai".
const std::vector<ConferenceConfig>& builtin_conferences();

/// Lookup by id or display name, case-insensitive. Throws Error(kInvalidConfig)
/// listing the known names when nothing matches.
const ConferenceConfig& find_conference(std::string_view key,
                                        const std::vector<ConferenceConfig>& known = builtin_conferences());

/// Placeholder guideline body generated from the criterion list.
std::string default_guideline(const std::string& name, const std::vector<std::string>& criteria,
                              const std::string& score_field, const ScoreScale& scale);

/// Parses {name, criteria, scale: {min, max, increment}, score_field_name,
/// guideline_path}. A relative guideline_path is resolved against `base_dir`;
/// when absent the placeholder guideline is generated.
ConferenceConfig conference_from_json(const nlohmann::json& j, const std::string& id, const std::string& base_dir);
nlohmann::json to_json(const ConferenceConfig& conf, const std::string& guideline_path);

/// Loads every *.json under `dir` (id = file stem).
std::vector<ConferenceConfig> load_conferences(const std::string& dir);

}  // namespace paraprobe::prompts
