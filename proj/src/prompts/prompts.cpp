#include "paraprobe/prompts/prompts.hpp"

#include <cctype>
#include <sstream>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"

namespace paraprobe::prompts {

namespace {

constexpr std::string_view kTaskLine =
    "Your task is to paraphrase the given original text while preserving its original meaning.";
constexpr std::string_view kIclLines =
    "You are provided with examples of previous paraphrases along with their review scores.\n"
    "Learn from these examples and generate a new paraphrase that is likely to receive a higher score.";
constexpr std::string_view kOriginalLabel = "Original text: ";
constexpr std::string_view kExamplesHeader = "\n\nExamples:\n\n---\n\n";
constexpr std::string_view kNewParaphrase = "New paraphrase:";
constexpr std::string_view kParaphraseLabel = "Paraphrase: ";
constexpr std::string_view kScoreLabel = "\n\nScore: ";
constexpr std::string_view kExampleSeparator = "\n\n---\n\n";

constexpr std::string_view kDelimitersBody =
    "You are an expert reviewer for {CONFERENCE}.\n"
    "Review the attached paper and provide the final score.\n"
    "\n"
    "=== Review Guideline ===\n"
    "{GUIDELINE}\n"
    "\n"
    "=== Output Format ===\n"
    "Output your review in the following format. Do not include any other information.\n"
    "=== [Review Criterion 1] ===\n"
    "...\n"
    "=== [Review Criterion J] ===\n"
    "\n"
    "=== Review Score ===";

constexpr std::string_view kMarkdownBody =
    "You are an expert reviewer for {CONFERENCE}.\n"
    "Review the attached paper according to the following guideline and provide your assessment.\n"
    "\n"
    "## Review Guideline\n"
    "{GUIDELINE}\n"
    "\n"
    "## Output Format\n"
    "Provide your review in Markdown format with the following sections:\n"
    "### [Review Criterion 1]\n"
    "...\n"
    "### [Review Criterion J]\n"
    "\n"
    "### Review Score";

constexpr std::string_view kNumberedBody =
    "You are an expert reviewer for {CONFERENCE}.\n"
    "Carefully review the attached paper and provide your evaluation.\n"
    "\n"
    "[Review Guideline]\n"
    "{GUIDELINE}\n"
    "\n"
    "[Output Format]\n"
    "Structure your review as follows:\n"
    "1. [Review Criterion 1]\n"
    "...\n"
    "J. [Review Criterion J]\n"
    "\n"
    "Final Score:";

std::string_view marker_for(TemplateId id) {
  switch (id) {
    case TemplateId::kDelimiters: return "=== Review Score ===";
    case TemplateId::kMarkdown: return "### Review Score";
    case TemplateId::kNumbered: return "Final Score:";
  }
  return "";
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

std::string build_zero_shot_prompt(std::string_view original) {
  std::string out(kTaskLine);
  out += "\n\n";
  out += kOriginalLabel;
  out += original;
  out += "\n\n";
  out += kNewParaphrase;
  return out;
}

std::string build_icl_prompt(std::string_view original, const std::vector<IclExample>& examples) {
  if (examples.empty()) throw Error(ErrorKind::kInvalidArgument, "ICL prompt needs at least one example");
  std::string out(kTaskLine);
  out += "\n";
  out += kIclLines;
  out += "\n\n";
  out += kOriginalLabel;
  out += original;
  out += kExamplesHeader;
  for (const auto& ex : examples) {
    out += kParaphraseLabel;
    out += ex.text;
    out += kScoreLabel;
    out += format_score(ex.score);
    out += kExampleSeparator;
  }
  out += kNewParaphrase;
  return out;
}

ParsedParaphrasePrompt parse_paraphrase_prompt(std::string_view prompt) {
  const auto bad = [] { return Error(ErrorKind::kInvalidArgument, "not a paraphrase prompt"); };
  const auto orig_pos = prompt.find(kOriginalLabel);
  const auto tail_len = std::string_view("\n\n").size() + kNewParaphrase.size();
  if (orig_pos == std::string_view::npos || prompt.size() < tail_len ||
      prompt.substr(prompt.size() - kNewParaphrase.size()) != kNewParaphrase) {
    throw bad();
  }
  const auto body_begin = orig_pos + kOriginalLabel.size();
  const auto body_end = prompt.size() - tail_len;
  if (body_end < body_begin) throw bad();
  const auto body = prompt.substr(body_begin, body_end - body_begin);

  ParsedParaphrasePrompt parsed;
  const auto ex_pos = body.find(kExamplesHeader);
  if (ex_pos == std::string_view::npos) {
    parsed.original = std::string(body);
    return parsed;
  }
  parsed.original = std::string(body.substr(0, ex_pos));
  // Remaining: "Paraphrase: ...\n\nScore: s\n\n---" repeated; the final
  // separator's trailing blank line was consumed as part of the tail.
  std::string_view rest = body.substr(ex_pos + kExamplesHeader.size());
  while (!rest.empty()) {
    if (rest.substr(0, kParaphraseLabel.size()) != kParaphraseLabel) throw bad();
    rest.remove_prefix(kParaphraseLabel.size());
    const auto score_pos = rest.find(kScoreLabel);
    if (score_pos == std::string_view::npos) throw bad();
    IclExample ex;
    ex.text = std::string(rest.substr(0, score_pos));
    rest.remove_prefix(score_pos + kScoreLabel.size());
    const auto sep = rest.find("\n\n---");
    if (sep == std::string_view::npos) throw bad();
    try {
      ex.score = std::stod(std::string(rest.substr(0, sep)));
    } catch (const std::exception&) {
      throw bad();
    }
    parsed.examples.push_back(std::move(ex));
    rest.remove_prefix(sep + std::string_view("\n\n---").size());
    if (rest.substr(0, 2) == "\n\n") rest.remove_prefix(2);
  }
  return parsed;
}

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kDelimiters: return "delimiters";
    case TemplateId::kMarkdown: return "markdown";
    case TemplateId::kNumbered: return "numbered";
  }
  return "";
}

TemplateId parse_template_id(std::string_view name) {
  if (name == "delimiters" || name == "1") return TemplateId::kDelimiters;
  if (name == "markdown" || name == "2") return TemplateId::kMarkdown;
  if (name == "numbered" || name == "3") return TemplateId::kNumbered;
  throw Error(ErrorKind::kInvalidConfig,
              "unknown reviewer template '" + std::string(name) + "'; known: delimiters, markdown, numbered");
}

std::string ReviewerTemplate::section_heading(const std::string& criterion, std::size_t position) const {
  switch (id) {
    case TemplateId::kDelimiters: return "=== " + criterion + " ===";
    case TemplateId::kMarkdown: return "### " + criterion;
    case TemplateId::kNumbered: return std::to_string(position) + ". " + criterion;
  }
  return criterion;
}

const ReviewerTemplate& builtin_template(TemplateId id) {
  static const ReviewerTemplate delimiters{TemplateId::kDelimiters, std::string(kDelimitersBody),
                                           std::string(marker_for(TemplateId::kDelimiters))};
  static const ReviewerTemplate markdown{TemplateId::kMarkdown, std::string(kMarkdownBody),
                                         std::string(marker_for(TemplateId::kMarkdown))};
  static const ReviewerTemplate numbered{TemplateId::kNumbered, std::string(kNumberedBody),
                                         std::string(marker_for(TemplateId::kNumbered))};
  switch (id) {
    case TemplateId::kDelimiters: return delimiters;
    case TemplateId::kMarkdown: return markdown;
    case TemplateId::kNumbered: return numbered;
  }
  return delimiters;
}

const std::vector<TemplateId>& all_template_ids() {
  static const std::vector<TemplateId> ids{TemplateId::kDelimiters, TemplateId::kMarkdown, TemplateId::kNumbered};
  return ids;
}

ReviewerTemplate load_template(TemplateId id, const std::string& path) {
  std::string body(trim(read_file(path)));
  if (body.find("[Review Criterion 1]") == std::string::npos || body.find("[Review Criterion J]") == std::string::npos) {
    throw Error(ErrorKind::kInvalidConfig, path + ": template lacks the criterion placeholders");
  }
  const auto marker = std::string(marker_for(id));
  if (count_occurrences(body, marker) != 1) {
    throw Error(ErrorKind::kInvalidConfig, path + ": template must contain '" + marker + "' exactly once");
  }
  return {id, std::move(body), marker};
}

std::string build_reviewer_prompt(const ConferenceConfig& conf, const ReviewerTemplate& tmpl) {
  const auto lines = split_lines(tmpl.body);
  std::string out;
  bool first = true;
  const auto emit = [&](const std::string& line) {
    if (!first) out += '\n';
    out += line;
    first = false;
  };
  bool in_range = false;
  for (const auto& line : lines) {
    if (line.find("[Review Criterion 1]") != std::string::npos) {
      for (std::size_t j = 0; j < conf.criteria.size(); ++j) {
        std::string expanded = line;
        replace_all(expanded, "[Review Criterion 1]", conf.criteria[j]);
        if (expanded.rfind("1. ", 0) == 0) expanded.replace(0, 1, std::to_string(j + 1));
        emit(expanded);
      }
      in_range = true;
      continue;
    }
    if (in_range) {
      if (line.find("[Review Criterion J]") != std::string::npos) in_range = false;
      continue;
    }
    emit(line);
  }
  replace_all(out, "{CONFERENCE}", conf.name);
  replace_all(out, "{GUIDELINE}", conf.guideline_text);
  return out;
}

TemplateId detect_template(std::string_view reviewer_prompt) {
  for (const auto id : all_template_ids()) {
    if (reviewer_prompt.find(marker_for(id)) != std::string_view::npos) return id;
  }
  throw Error(ErrorKind::kInvalidArgument, "reviewer prompt carries no known score marker");
}

std::vector<std::string> criteria_from_prompt(std::string_view reviewer_prompt, TemplateId id) {
  const auto lines = split_lines(reviewer_prompt);
  std::vector<std::string> out;
  bool in_format = false;
  const auto marker = marker_for(id);
  for (const auto& raw : lines) {
    const std::string_view line = raw;
    if (!in_format) {
      if (line == "=== Output Format ===" || line == "## Output Format" || line == "[Output Format]") in_format = true;
      continue;
    }
    if (line == marker) break;
    switch (id) {
      case TemplateId::kDelimiters:
        if (line.size() > 8 && line.substr(0, 4) == "=== " && line.substr(line.size() - 4) == " ===") {
          out.emplace_back(line.substr(4, line.size() - 8));
        }
        break;
      case TemplateId::kMarkdown:
        if (line.substr(0, 4) == "### ") out.emplace_back(line.substr(4));
        break;
      case TemplateId::kNumbered: {
        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i > 0 && line.substr(i, 2) == ". ") out.emplace_back(line.substr(i + 2));
        break;
      }
    }
  }
  return out;
}

std::string render_review(const ReviewerTemplate& tmpl,
                          const std::vector<std::pair<std::string, std::string>>& sections,
                          const Rational& score) {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    out += tmpl.section_heading(sections[i].first, i + 1);
    out += '\n';
    out += sections[i].second;
    out += "\n\n";
  }
  out += tmpl.score_marker;
  out += '\n';
  out += score.to_string();
  return out;
}

ReviewOutput parse_review(std::string_view raw, const ReviewerTemplate& tmpl, const ScoreScale& scale,
                          ParseOptions options) {
  const auto pos = raw.rfind(tmpl.score_marker);
  if (pos == std::string_view::npos) {
    throw Error(ErrorKind::kMissingMarker, "review lacks '" + tmpl.score_marker + "'");
  }
  ReviewOutput out;
  out.template_id = tmpl.id;
  out.marker_occurrences = static_cast<int>(count_occurrences(raw, tmpl.score_marker));
  out.content = std::string(trim(raw.substr(0, pos)));

  std::string_view after = raw.substr(pos + tmpl.score_marker.size());
  std::size_t i = 0;
  while (i < after.size() && !std::isdigit(static_cast<unsigned char>(after[i]))) {
    // Only whitespace and light punctuation may precede the number.
    const char c = after[i];
    if (!(std::isspace(static_cast<unsigned char>(c)) || c == ':' || c == '*' || c == '-' || c == '+')) break;
    ++i;
  }
  std::size_t start = i;
  if (start > 0 && (after[start - 1] == '-' || after[start - 1] == '+')) --start;
  std::size_t end = i;
  while (end < after.size() && std::isdigit(static_cast<unsigned char>(after[end]))) ++end;
  if (end < after.size() && after[end] == '.' && end + 1 < after.size() &&
      std::isdigit(static_cast<unsigned char>(after[end + 1]))) {
    ++end;
    while (end < after.size() && std::isdigit(static_cast<unsigned char>(after[end]))) ++end;
  }
  if (end == i) throw Error(ErrorKind::kInvalidScore, "no number after the score marker");

  const Rational value = Rational::parse_decimal(after.substr(start, end - start));
  if (value < scale.min() || value > scale.max()) {
    throw Error(ErrorKind::kInvalidScore, "score " + value.to_string() + " outside the scale");
  }
  if (!scale.contains(value)) {
    if (!options.round_to_lattice) {
      throw Error(ErrorKind::kInvalidScore, "score " + value.to_string() + " is off the lattice");
    }
    out.score = scale.nearest(value.to_double());
  } else {
    out.score = value;
  }
  out.trailing_prose = !trim(after.substr(end)).empty();
  return out;
}

}  // namespace paraprobe::prompts
