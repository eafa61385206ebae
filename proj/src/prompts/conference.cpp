#include "paraprobe/prompts/conference.hpp"

#include <algorithm>
#include <filesystem>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"

namespace paraprobe::prompts {

namespace {

ConferenceConfig make(std::string id, std::string name, std::vector<std::string> criteria, ScoreScale scale,
                      std::string score_field) {
  ConferenceConfig c{std::move(id), std::move(name), std::move(criteria), "", std::move(scale),
                     std::move(score_field)};
  c.guideline_text = default_guideline(c.name, c.criteria, c.score_field_name, c.scale);
  c.validate();
  return c;
}

Rational scale_value(const nlohmann::json& v) {
  if (v.is_string()) return Rational::parse_decimal(v.get<std::string>());
  return Rational::from_double(v.get<double>());
}

}  // namespace

void ConferenceConfig::validate() const {
  if (criteria.empty()) throw Error(ErrorKind::kInvalidConfig, name + ": criteria list is empty");
  if (std::find(criteria.begin(), criteria.end(), score_field_name) == criteria.end()) {
    throw Error(ErrorKind::kInvalidConfig, name + ": score field '" + score_field_name + "' is not a criterion");
  }
}

std::string default_guideline(const std::string& name, const std::vector<std::string>& criteria,
                              const std::string& score_field, const ScoreScale& scale) {
  std::string out = "Follow the official " + name + " reviewer guidelines. Address each field below.\n";
  for (const auto& c : criteria) {
    out += "- " + c + ": ";
    if (c == score_field) {
      out += "give a single score from " + scale.min().to_string() + " to " + scale.max().to_string() +
             " in increments of " + scale.increment().to_string() + ".";
    } else {
      out += "see the official description of this field.";
    }
    out += "\n";
  }
  out += "(Placeholder guideline; replace with the venue's published text.)";
  return out;
}

const std::vector<ConferenceConfig>& builtin_conferences() {
  static const std::vector<ConferenceConfig> confs = [] {
    std::vector<ConferenceConfig> v;
    v.push_back(make("acl", "ACL 2025",
                     {"Paper Summary", "Summary of Strengths", "Summary of Weaknesses", "Comments/Suggestions/Typos",
                      "Reviewer Confidence", "Soundness", "Excitement", "Overall Assessment"},
                     scales::acl(), "Overall Assessment"));
    v.push_back(make("neurips", "NeurIPS 2025",
                     {"Summary", "Strengths and Weaknesses", "Quality", "Clarity", "Significance", "Originality",
                      "Questions", "Limitations", "Overall", "Confidence", "Ethical concerns"},
                     scales::neurips(), "Overall"));
    v.push_back(make("icml", "ICML 2025",
                     {"Summary", "Claims and Evidence", "Relation to Prior Works", "Other Aspects",
                      "Questions for Authors", "Ethical Issues", "Overall Recommendation"},
                     scales::icml(), "Overall Recommendation"));
    v.push_back(make("iclr", "ICLR 2025",
                     {"Summary", "Soundness", "Presentation", "Contribution", "Strengths", "Weaknesses", "Questions",
                      "Flag For Ethics Review", "Rating", "Confidence"},
                     scales::iclr(), "Rating"));
    v.push_back(make("aaai", "AAAI 2025",
                     {"Summary", "Strengths And Weaknesses", "Questions For The Authors", "Significance Of The Problem",
                      "Justification Of Approach", "Quality Of Evaluation",
                      "Reproducibility And Facilitation Of Follow Up Work", "Ethical Considerations",
                      "Overall Evaluation", "Confidence"},
                     scales::aaai(), "Overall Evaluation"));
    return v;
  }();
  return confs;
}

const ConferenceConfig& find_conference(std::string_view key, const std::vector<ConferenceConfig>& known) {
  const auto wanted = to_lower(key);
  for (const auto& c : known) {
    if (to_lower(c.id) == wanted || to_lower(c.name) == wanted) return c;
  }
  std::string names;
  for (const auto& c : known) names += (names.empty() ? "" : ", ") + c.id;
  throw Error(ErrorKind::kInvalidConfig, "unknown conference '" + std::string(key) + "'; known: " + names);
}

ConferenceConfig conference_from_json(const nlohmann::json& j, const std::string& id, const std::string& base_dir) {
  try {
    const auto& s = j.at("scale");
    ScoreScale scale(scale_value(s.at("min")), scale_value(s.at("max")), scale_value(s.at("increment")));
    ConferenceConfig c{id,
                       j.at("name").get<std::string>(),
                       j.at("criteria").get<std::vector<std::string>>(),
                       "",
                       scale,
                       j.at("score_field_name").get<std::string>()};
    if (j.contains("guideline_path") && !j.at("guideline_path").is_null()) {
      std::filesystem::path gp(j.at("guideline_path").get<std::string>());
      if (gp.is_relative()) gp = std::filesystem::path(base_dir) / gp;
      c.guideline_text = std::string(trim(read_file(gp.string())));
    } else {
      c.guideline_text = default_guideline(c.name, c.criteria, c.score_field_name, c.scale);
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, "conference '" + id + "': " + e.what());
  }
}

nlohmann::json to_json(const ConferenceConfig& c, const std::string& guideline_path) {
  return {{"name", c.name},
          {"criteria", c.criteria},
          {"scale",
           {{"min", c.scale.min().to_double()},
            {"max", c.scale.max().to_double()},
            {"increment", c.scale.increment().to_double()}}},
          {"score_field_name", c.score_field_name},
          {"guideline_path", guideline_path}};
}

std::vector<ConferenceConfig> load_conferences(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ConferenceConfig> out;
  for (const auto& f : files) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(f.string()));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kInvalidConfig, f.string() + ": " + e.what());
    }
    out.push_back(conference_from_json(j, f.stem().string(), dir));
  }
  return out;
}

}  // namespace paraprobe::prompts
