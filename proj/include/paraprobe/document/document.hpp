#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paraprobe/core/types.hpp"

namespace paraprobe::doc {

/// Whole-line markers delimiting the abstract in plain-text sources.
struct PlainMarkers {
  std::string begin = "[[abstract]]";
  std::string end = "[[/abstract]]";
};

/// Inner content of the single abstract, whitespace-trimmed. LaTeX: the
/// abstract environment (occurrences inside % comments are ignored). Plain:
/// the lines between the marker lines. Throws Error(kAbstractNotFound) or
/// Error(kMultipleAbstracts).
ByteRange locate_abstract(std::string_view source, DocumentFormat format, const PlainMarkers& markers = {});

struct PatchResult {
  std::string patched_text;
  ByteRange span_after;
  std::optional<std::string> compile_artifact;
  std::vector<std::string> lint_warnings;
};

/// Replaces the target span. Bytes outside the span are untouched; for LaTeX
/// sources the replacement is linted, never rewritten.
PatchResult apply_patch(const SourceDocument& doc, std::string_view replacement);

/// Replaces several disjoint ranges at once. `ranges` must be sorted and
/// disjoint; the returned spans are the new positions, in the same order.
struct MultiPatchResult {
  std::string patched_text;
  std::vector<ByteRange> spans_after;
  std::vector<std::string> lint_warnings;
};
MultiPatchResult apply_patches(std::string_view source, DocumentFormat format, const std::vector<ByteRange>& ranges,
                               const std::vector<std::string>& replacements);

/// Warnings for text inserted into a LaTeX source: unescaped percent signs,
/// unbalanced braces, unbalanced begin/end pairs.
std::vector<std::string> lint_latex_insert(std::string_view text);

/// Blank-line separated paragraphs, sorted, none overlapping `exclude`. For
/// LaTeX only the document body is considered, and environment contents,
/// comment lines and bare command lines (\section{...}, \label{...}) act as
/// separators.
std::vector<ByteRange> segment_paragraphs(std::string_view source, DocumentFormat format, ByteRange exclude);

/// Locates the abstract and indexes paragraphs in one go.
SourceDocument load_document(std::string source, DocumentFormat format, const PlainMarkers& markers = {});

/// Same document with the target span replaced and the index recomputed.
SourceDocument with_replacement(const SourceDocument& doc, std::string_view replacement,
                                const PlainMarkers& markers = {});

/// Inlines \input{...} and \include{...} recursively (depth 16), resolving
/// names against the including file's directory and appending ".tex" when
/// needed. Missing files are left as-is.
std::string resolve_includes(const std::string& main_path);

/// External compile step. `command_template` may use {source} and {output}.
struct CompileHook {
  std::string command_template;
  std::string output_name = "paper.pdf";

  bool configured() const noexcept { return !command_template.empty(); }
};

/// Runs the hook on an already written source file and returns the artifact
/// path. Throws Error(kHookUnconfigured) when no command is set and
/// Error(kCompileFailed) with captured stderr on a non-zero exit or a missing
/// artifact. Calls that share an output directory are serialized.
std::string compile_hook(const std::string& patched_source_path, const CompileHook& hook);

}  // namespace paraprobe::doc
