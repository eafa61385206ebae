#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "paraprobe/core/rational.hpp"
#include "paraprobe/core/score_scale.hpp"
#include "paraprobe/prompts/conference.hpp"

namespace paraprobe::prompts {

// ---------------------------------------------------------------------------
// Attacker prompts

/// Zero-shot paraphrase request for `original`.
std::string build_zero_shot_prompt(std::string_view original);

struct IclExample {
  std::string text;
  double score = 0.0;
};

/// Paraphrase request carrying previous (paraphrase, score) pairs in the
/// order given. Throws Error(kInvalidArgument) when `examples` is empty.
std::string build_icl_prompt(std::string_view original, const std::vector<IclExample>& examples);

/// The pieces a paraphrase prompt was built from. Used by generators that
/// need structure rather than prose (the mock generator in particular).
struct ParsedParaphrasePrompt {
  std::string original;
  std::vector<IclExample> examples;
};

/// Inverse of the two builders above. Throws Error(kInvalidArgument) when the
/// text lacks the "Original text:" / "New paraphrase:" frame.
ParsedParaphrasePrompt parse_paraphrase_prompt(std::string_view prompt);

// ---------------------------------------------------------------------------
// Reviewer prompts

enum class TemplateId { kDelimiters, kMarkdown, kNumbered };

std::string_view to_string(TemplateId id);
TemplateId parse_template_id(std::string_view name);

/// Reviewer prompt layout with {CONFERENCE}, {GUIDELINE} and
/// "[Review Criterion 1] ... [Review Criterion J]" placeholders.
struct ReviewerTemplate {
  TemplateId id = TemplateId::kDelimiters;
  std::string body;
  std::string score_marker;

  /// How one criterion heading is written in a review (1-based position).
  std::string section_heading(const std::string& criterion, std::size_t position) const;
};

const ReviewerTemplate& builtin_template(TemplateId id);
const std::vector<TemplateId>& all_template_ids();

/// Reads a template body from disk; the marker is implied by `id`.
ReviewerTemplate load_template(TemplateId id, const std::string& path);

std::string build_reviewer_prompt(const ConferenceConfig& conf, const ReviewerTemplate& tmpl);

/// Detects which builtin template a rendered reviewer prompt came from by its
/// score marker.
TemplateId detect_template(std::string_view reviewer_prompt);

/// Criterion names listed in the output-format section of a rendered prompt.
std::vector<std::string> criteria_from_prompt(std::string_view reviewer_prompt, TemplateId id);

/// Renders a review in the template's output format: each section heading
/// followed by its body, then the score marker and the score.
std::string render_review(const ReviewerTemplate& tmpl,
                          const std::vector<std::pair<std::string, std::string>>& sections,
                          const Rational& score);

// ---------------------------------------------------------------------------
// Reviewer output

struct ReviewOutput {
  std::string content;
  Rational score;
  TemplateId template_id = TemplateId::kDelimiters;
  int marker_occurrences = 1;
  bool trailing_prose = false;
};

struct ParseOptions {
  bool round_to_lattice = false;
};

/// Splits a raw review at the last score marker. Throws Error(kMissingMarker)
/// when the marker is absent and Error(kInvalidScore) when no number follows
/// or the number is off the lattice (unless rounding is enabled) or out of
/// range.
ReviewOutput parse_review(std::string_view raw, const ReviewerTemplate& tmpl, const ScoreScale& scale,
                          ParseOptions options = {});

}  // namespace paraprobe::prompts
