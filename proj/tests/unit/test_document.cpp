#include <filesystem>
#include <random>

#include <unistd.h>

#include "doctest.h"
#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"
#include "paraprobe/document/document.hpp"

using namespace paraprobe;
using namespace paraprobe::doc;
namespace fs = std::filesystem;

namespace {

const std::string kLatex =
    "\\documentclass{article}\n"
    "\\begin{document}\n"
    "% \\begin{abstract} not this one \\end{abstract}\n"
    "\\begin{abstract}\n"
    "  We study things.\n"
    "\\end{abstract}\n"
    "\n"
    "\\section{Intro}\n"
    "\n"
    "First paragraph\nspans two lines.\n"
    "\n"
    "Second paragraph.\n"
    "\\begin{equation}\n"
    "x = 1\n"
    "\\end{equation}\n"
    "Third paragraph.\n"
    "\\end{document}\n";

const std::string kPlain =
    "Title line\n"
    "\n"
    "[[abstract]]\n"
    "We study things.\n"
    "[[/abstract]]\n"
    "\n"
    "Body one.\n"
    "\n"
    "Body two.\n";

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("paraprobe-doc-" + std::to_string(::getpid()) + "-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("latex abstract is the trimmed environment body, comments ignored") {
  const auto r = locate_abstract(kLatex, DocumentFormat::kLatex);
  CHECK(r.slice(kLatex) == "We study things.");
}

TEST_CASE("plain abstract sits between marker lines") {
  const auto r = locate_abstract(kPlain, DocumentFormat::kPlain);
  CHECK(r.slice(kPlain) == "We study things.");
  PlainMarkers m{"<abs>", "</abs>"};
  const std::string custom = "x\n<abs>\nHello there.\n</abs>\ny\n";
  CHECK(locate_abstract(custom, DocumentFormat::kPlain, m).slice(custom) == "Hello there.");
}

TEST_CASE("missing or repeated abstracts are errors") {
  try {
    locate_abstract("\\begin{document}x\\end{document}", DocumentFormat::kLatex);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kAbstractNotFound);
  }
  const std::string two = "\\begin{abstract}a\\end{abstract}\n\\begin{abstract}b\\end{abstract}";
  try {
    locate_abstract(two, DocumentFormat::kLatex);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMultipleAbstracts);
  }
  CHECK_THROWS_AS(locate_abstract("no markers", DocumentFormat::kPlain), Error);
}

TEST_CASE("paragraph index skips the abstract, commands and environments") {
  const auto doc = load_document(kLatex, DocumentFormat::kLatex);
  std::vector<std::string> paras;
  for (const auto& r : doc.paragraph_index()) paras.emplace_back(r.slice(doc.source_text()));
  CHECK(paras == std::vector<std::string>{"First paragraph\nspans two lines.", "Second paragraph.", "Third paragraph."});

  const auto plain = load_document(kPlain, DocumentFormat::kPlain);
  std::vector<std::string> pp;
  for (const auto& r : plain.paragraph_index()) pp.emplace_back(r.slice(plain.source_text()));
  CHECK(pp == std::vector<std::string>{"Title line", "Body one.", "Body two."});
}

TEST_CASE("patch leaves every byte outside the span unchanged (1000 random cases)") {
  std::mt19937_64 rng(20250101);
  const std::string alphabet = "abc XYZ\n\t%{}\\é0123456789.";
  const auto random_text = [&](std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  int failures = 0;
  for (int c = 0; c < 1000; ++c) {
    const std::size_t len = 1 + rng() % 400;
    const std::string src = random_text(len);
    const std::size_t b = rng() % len;
    const std::size_t e = b + 1 + rng() % (len - b);
    const std::string rep = random_text(rng() % 300);
    const SourceDocument d(src, c % 2 ? DocumentFormat::kLatex : DocumentFormat::kPlain, {b, e});
    const auto out = apply_patch(d, rep);
    const auto& t = out.patched_text;
    const bool ok = t.size() == len - (e - b) + rep.size() && t.compare(0, b, src, 0, b) == 0 &&
                    t.compare(b, rep.size(), rep) == 0 && t.compare(b + rep.size(), std::string::npos, src, e) == 0 &&
                    out.span_after.begin == b && out.span_after.end == b + rep.size();
    if (!ok) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("multi-range patches keep the gaps intact") {
  const std::string src = "aaaa|bbbb|cccc|dddd";
  const auto out = apply_patches(src, DocumentFormat::kPlain, {{0, 4}, {10, 14}}, {"X", "YYYYYY"});
  CHECK(out.patched_text == "X|bbbb|YYYYYY|dddd");
  REQUIRE(out.spans_after.size() == 2);
  CHECK(out.spans_after[1].slice(out.patched_text) == "YYYYYY");
  CHECK_THROWS_AS(apply_patches(src, DocumentFormat::kPlain, {{5, 9}, {0, 4}}, {"a", "b"}), Error);
  CHECK_THROWS_AS(apply_patches(src, DocumentFormat::kPlain, {{0, 4}}, {"a", "b"}), Error);
}

TEST_CASE("latex inserts are linted, not rewritten") {
  CHECK(lint_latex_insert("plain words").empty());
  CHECK_FALSE(lint_latex_insert("50% better").empty());
  CHECK(lint_latex_insert("50\\% better").empty());
  CHECK_FALSE(lint_latex_insert("a {b").empty());
  CHECK_FALSE(lint_latex_insert("\\begin{itemize} x").empty());
  const auto doc = load_document(kLatex, DocumentFormat::kLatex);
  const auto out = apply_patch(doc, "Gains of 50% {unbalanced");
  CHECK(out.lint_warnings.size() >= 2);
  CHECK(out.patched_text.find("Gains of 50% {unbalanced") != std::string::npos);
}

TEST_CASE("with_replacement re-indexes the patched document") {
  const auto doc = load_document(kLatex, DocumentFormat::kLatex);
  const auto next = with_replacement(doc, "A longer abstract than before.");
  CHECK(next.target_text() == "A longer abstract than before.");
  CHECK(next.paragraph_index().size() == doc.paragraph_index().size());
  CHECK(next.paragraph_index().front().slice(next.source_text()) == "First paragraph\nspans two lines.");
}

TEST_CASE("includes are inlined recursively") {
  const auto dir = temp_dir("inc");
  write_file((dir / "main.tex").string(), "A\n\\input{sec/one}\n% \\input{skip}\nZ\n");
  fs::create_directories(dir / "sec");
  write_file((dir / "sec" / "one.tex").string(), "B \\include{two} C");
  write_file((dir / "sec" / "two.tex").string(), "D");
  write_file((dir / "skip.tex").string(), "SHOULD NOT APPEAR");
  CHECK(resolve_includes((dir / "main.tex").string()) == "A\nB D C\n% \\input{skip}\nZ\n");
}

TEST_CASE("compile hook runs the command and reports failures") {
  const auto dir = temp_dir("compile");
  const auto src = (dir / "paper.tex").string();
  write_file(src, "content");
  CompileHook ok{"cp {source} {output}", "paper.pdf"};
  const auto artifact = compile_hook(src, ok);
  CHECK(read_file(artifact) == "content");

  try {
    compile_hook(src, CompileHook{"echo broken >&2; exit 1", "paper.pdf"});
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCompileFailed);
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
  }
  CHECK_THROWS_AS(compile_hook(src, CompileHook{"true", "missing.pdf"}), Error);
  try {
    compile_hook(src, CompileHook{});
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kHookUnconfigured);
  }
}
