#include "paraprobe/document/document.hpp"

#include <sys/wait.h>

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <regex>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"

namespace paraprobe::doc {

namespace {

constexpr std::string_view kBeginAbstract = "\\begin{abstract}";
constexpr std::string_view kEndAbstract = "\\end{abstract}";

struct Line {
  std::size_t begin;  // first byte
  std::size_t end;    // one past the last content byte (newline excluded)
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view s, std::size_t offset = 0) {
  std::vector<Line> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    std::size_t end = nl;
    if (end > start && s[end - 1] == '\r') --end;
    out.push_back({offset + start, offset + end, s.substr(start, end - start)});
    if (nl == s.size()) break;
    start = nl + 1;
  }
  return out;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

/// True when an unescaped '%' precedes `pos` on the same line.
bool is_commented(std::string_view source, std::size_t pos) {
  std::size_t line_start = source.rfind('\n', pos == 0 ? 0 : pos - 1);
  line_start = (line_start == std::string_view::npos || pos == 0) ? 0 : line_start + 1;
  for (std::size_t i = line_start; i < pos; ++i) {
    if (source[i] == '%' && (i == 0 || source[i - 1] != '\\')) return true;
  }
  return false;
}

std::vector<std::size_t> find_uncommented(std::string_view source, std::string_view needle, std::size_t from = 0) {
  std::vector<std::size_t> out;
  for (auto pos = source.find(needle, from); pos != std::string_view::npos; pos = source.find(needle, pos + 1)) {
    if (!is_commented(source, pos)) out.push_back(pos);
  }
  return out;
}

ByteRange trimmed_range(std::string_view source, std::size_t begin, std::size_t end) {
  while (begin < end && std::isspace(static_cast<unsigned char>(source[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(source[end - 1]))) --end;
  return {begin, end};
}

int count_unescaped(std::string_view s, char c) {
  int n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == c && (i == 0 || s[i - 1] != '\\')) ++n;
  }
  return n;
}

std::size_t count_sub(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string_view::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::mutex& directory_mutex(const std::string& dir) {
  static std::mutex registry_mu;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::lock_guard lock(registry_mu);
  auto& slot = registry[dir];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

}  // namespace

ByteRange locate_abstract(std::string_view source, DocumentFormat format, const PlainMarkers& markers) {
  if (source.empty()) throw Error(ErrorKind::kInvalidArgument, "empty source");

  if (format == DocumentFormat::kLatex) {
    const auto begins = find_uncommented(source, kBeginAbstract);
    if (begins.empty()) throw Error(ErrorKind::kAbstractNotFound, "no abstract environment");
    if (begins.size() > 1) {
      throw Error(ErrorKind::kMultipleAbstracts, std::to_string(begins.size()) + " abstract environments");
    }
    const auto inner_begin = begins.front() + kBeginAbstract.size();
    const auto ends = find_uncommented(source, kEndAbstract, inner_begin);
    if (ends.empty()) throw Error(ErrorKind::kAbstractNotFound, "abstract environment is not closed");
    const auto range = trimmed_range(source, inner_begin, ends.front());
    if (range.empty()) throw Error(ErrorKind::kAbstractNotFound, "abstract environment is empty");
    return range;
  }

  const auto lines = split_lines(source);
  std::vector<std::size_t> begin_lines;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i].text) == markers.begin) begin_lines.push_back(i);
  }
  if (begin_lines.empty()) throw Error(ErrorKind::kAbstractNotFound, "no '" + markers.begin + "' line");
  if (begin_lines.size() > 1) {
    throw Error(ErrorKind::kMultipleAbstracts, std::to_string(begin_lines.size()) + " abstract markers");
  }
  const auto first = begin_lines.front();
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (trim(lines[i].text) == markers.end) {
      const std::size_t inner_begin = first + 1 < lines.size() ? lines[first + 1].begin : source.size();
      const auto range = trimmed_range(source, std::min(inner_begin, lines[i].begin), lines[i].begin);
      if (range.empty()) throw Error(ErrorKind::kAbstractNotFound, "abstract block is empty");
      return range;
    }
  }
  throw Error(ErrorKind::kAbstractNotFound, "no '" + markers.end + "' line after the abstract marker");
}

std::vector<std::string> lint_latex_insert(std::string_view text) {
  std::vector<std::string> warnings;
  if (count_unescaped(text, '%') > 0) {
    warnings.emplace_back("unescaped '%' in replacement comments out the rest of its line");
  }
  if (count_unescaped(text, '{') != count_unescaped(text, '}')) {
    warnings.emplace_back("unbalanced braces in replacement");
  }
  if (count_sub(text, "\\begin{") != count_sub(text, "\\end{")) {
    warnings.emplace_back("unbalanced environment delimiters in replacement");
  }
  return warnings;
}

PatchResult apply_patch(const SourceDocument& doc, std::string_view replacement) {
  const auto& src = doc.source_text();
  const auto& span = doc.target_span();
  PatchResult out;
  out.patched_text.reserve(src.size() - span.size() + replacement.size());
  out.patched_text.append(src, 0, span.begin);
  out.patched_text.append(replacement);
  out.patched_text.append(src, span.end, std::string::npos);
  out.span_after = {span.begin, span.begin + replacement.size()};
  if (doc.format() == DocumentFormat::kLatex) out.lint_warnings = lint_latex_insert(replacement);
  return out;
}

MultiPatchResult apply_patches(std::string_view source, DocumentFormat format, const std::vector<ByteRange>& ranges,
                               const std::vector<std::string>& replacements) {
  if (ranges.size() != replacements.size()) {
    throw Error(ErrorKind::kInvalidArgument, "ranges and replacements differ in length");
  }
  MultiPatchResult out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    if (r.begin < cursor || r.end > source.size() || r.end < r.begin) {
      throw Error(ErrorKind::kInvalidArgument, "patch ranges must be sorted, disjoint and inside the source");
    }
    out.patched_text.append(source.substr(cursor, r.begin - cursor));
    const auto start = out.patched_text.size();
    out.patched_text.append(replacements[i]);
    out.spans_after.push_back({start, out.patched_text.size()});
    if (format == DocumentFormat::kLatex) {
      for (auto& w : lint_latex_insert(replacements[i])) out.lint_warnings.push_back(std::move(w));
    }
    cursor = r.end;
  }
  out.patched_text.append(source.substr(cursor));
  return out;
}

std::vector<ByteRange> segment_paragraphs(std::string_view source, DocumentFormat format, ByteRange exclude) {
  std::vector<ByteRange> out;
  const auto push = [&](std::size_t b, std::size_t e) {
    const ByteRange r = trimmed_range(source, b, e);
    if (!r.empty() && !r.overlaps(exclude)) out.push_back(r);
  };

  if (format == DocumentFormat::kPlain) {
    const PlainMarkers markers;
    std::optional<std::size_t> start;
    std::size_t last_end = 0;
    for (const auto& line : split_lines(source)) {
      const auto t = trim(line.text);
      const bool separator = t.empty() || t == markers.begin || t == markers.end;
      if (separator) {
        if (start) push(*start, last_end);
        start.reset();
        continue;
      }
      if (!start) start = line.begin;
      last_end = line.end;
    }
    if (start) push(*start, last_end);
    return out;
  }

  std::size_t body_begin = 0;
  std::size_t body_end = source.size();
  const auto doc_begin = find_uncommented(source, "\\begin{document}");
  if (!doc_begin.empty()) {
    const auto nl = source.find('\n', doc_begin.front());
    body_begin = nl == std::string_view::npos ? source.size() : nl + 1;
  }
  const auto doc_end = find_uncommented(source, "\\end{document}", body_begin);
  if (!doc_end.empty()) body_end = doc_end.front();

  static const std::regex kBareCommand(R"(^\s*\\[A-Za-z]+\*?(\[[^\]]*\])?(\{[^{}]*\})*\s*(%.*)?$)");
  static const std::regex kEnvToken(R"(\\(begin|end)\{([^}]*)\})");

  int depth = 0;
  std::optional<std::size_t> start;
  std::size_t last_end = 0;
  for (const auto& line : split_lines(source.substr(body_begin, body_end - body_begin), body_begin)) {
    const auto t = trim(line.text);
    // Strip a trailing comment before looking for environment tokens.
    std::string code(line.text);
    for (std::size_t i = 0; i < code.size(); ++i) {
      if (code[i] == '%' && (i == 0 || code[i - 1] != '\\')) {
        code.resize(i);
        break;
      }
    }
    int opens = 0;
    int closes = 0;
    for (std::sregex_iterator it(code.begin(), code.end(), kEnvToken), end; it != end; ++it) {
      if ((*it)[2] == "document") continue;
      ((*it)[1] == "begin" ? opens : closes)++;
    }
    const bool separator = t.empty() || t.front() == '%' || depth > 0 || opens > 0 || closes > 0 ||
                           std::regex_match(code, kBareCommand);
    depth = std::max(0, depth + opens - closes);
    if (separator) {
      if (start) push(*start, last_end);
      start.reset();
      continue;
    }
    if (!start) start = line.begin;
    last_end = line.end;
  }
  if (start) push(*start, last_end);
  return out;
}

SourceDocument load_document(std::string source, DocumentFormat format, const PlainMarkers& markers) {
  const auto target = locate_abstract(source, format, markers);
  auto paragraphs = segment_paragraphs(source, format, target);
  return SourceDocument(std::move(source), format, target, std::move(paragraphs));
}

SourceDocument with_replacement(const SourceDocument& doc, std::string_view replacement, const PlainMarkers&) {
  auto patched = apply_patch(doc, replacement);
  auto paragraphs = segment_paragraphs(patched.patched_text, doc.format(), patched.span_after);
  return SourceDocument(std::move(patched.patched_text), doc.format(), patched.span_after, std::move(paragraphs));
}

namespace {

std::string resolve_includes_impl(const std::filesystem::path& path, int depth) {
  std::string text = read_file(path.string());
  if (depth >= 16) return text;
  static const std::regex kInclude(R"(\\(input|include)\{([^}]+)\})");
  std::string out;
  std::size_t cursor = 0;
  for (std::sregex_iterator it(text.begin(), text.end(), kInclude), end; it != end; ++it) {
    const auto pos = static_cast<std::size_t>(it->position());
    if (is_commented(text, pos)) continue;
    std::filesystem::path target = path.parent_path() / (*it)[2].str();
    if (!std::filesystem::exists(target) && target.extension() != ".tex") target += ".tex";
    if (!std::filesystem::exists(target)) continue;
    out.append(text, cursor, pos - cursor);
    out += resolve_includes_impl(target, depth + 1);
    cursor = pos + static_cast<std::size_t>(it->length());
  }
  out.append(text, cursor, std::string::npos);
  return out;
}

}  // namespace

std::string resolve_includes(const std::string& main_path) { return resolve_includes_impl(main_path, 0); }

std::string compile_hook(const std::string& patched_source_path, const CompileHook& hook) {
  if (!hook.configured()) throw Error(ErrorKind::kHookUnconfigured, "no compile command configured");
  const std::filesystem::path source(patched_source_path);
  const auto dir = source.has_parent_path() ? source.parent_path() : std::filesystem::path(".");
  const auto output = (dir / hook.output_name).string();
  const auto err_path = (dir / (source.filename().string() + ".compile.stderr")).string();

  std::string command = hook.command_template;
  replace_all(command, "{source}", shell_quote(source.string()));
  replace_all(command, "{output}", shell_quote(output));

  std::lock_guard lock(directory_mutex(std::filesystem::absolute(dir).string()));
  std::error_code ec;
  std::filesystem::remove(output, ec);
  const std::string full = "( " + command + " ) > /dev/null 2> " + shell_quote(err_path);
  const int status = std::system(full.c_str());
  std::string stderr_text;
  try {
    stderr_text = read_file(err_path);
  } catch (const Error&) {
  }
  const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  if (code != 0) {
    throw Error(ErrorKind::kCompileFailed,
                "compile command exited " + std::to_string(code) + ": " + std::string(trim(stderr_text)));
  }
  if (!std::filesystem::exists(output)) {
    throw Error(ErrorKind::kCompileFailed, "compile command succeeded but did not produce " + output);
  }
  return output;
}

}  // namespace paraprobe::doc
