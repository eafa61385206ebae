#include <filesystem>
#include <set>

#include <unistd.h>

#include "doctest.h"
#include "paraprobe/core/util.hpp"
#include "paraprobe/document/document.hpp"
#include "paraprobe/sim/sim.hpp"

using namespace paraprobe;
using namespace paraprobe::sim;
namespace fs = std::filesystem;

namespace {

SuiteConfig tiny_suite() {
  SuiteConfig c;
  c.documents = 2;
  c.seeds = 2;
  c.search.candidates_per_step = 4;
  c.search.samples_per_candidate = 2;
  c.search.iterations = 3;
  c.random_max_n = 3;
  return c;
}

}  // namespace

TEST_CASE("default world keeps plain words neutral") {
  const auto& w = default_world();
  CHECK(w.lexicon.group_count() == 20);
  for (const auto& g : w.lexicon.groups()) {
    CHECK(g.size() >= 3);
    CHECK(w.weights.count(g.front()) == 0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(w.weights.count(g[i]) == 1);
  }
}

TEST_CASE("synthetic documents have one plain abstract and a body using every word") {
  const auto& w = default_world();
  for (int i = 0; i < 5; ++i) {
    const auto text = synthetic_document(i, 42);
    CHECK(text == synthetic_document(i, 42));
    const auto d = doc::load_document(text, DocumentFormat::kLatex);
    CHECK(d.paragraph_index().size() >= 10);
    const auto abs = providers::SiteText::parse(d.target_text(), w.lexicon);
    CHECK(abs.sites.size() > 10);
    for (std::size_t s = 0; s < abs.sites.size(); ++s) {
      CHECK(to_lower(abs.site_word(s)) == w.lexicon.members(abs.site_groups[s]).front());
    }
    std::set<std::string> body_words;
    for (const auto& r : d.paragraph_index()) {
      for (const auto& t : word_tokens(r.slice(text))) body_words.insert(t);
    }
    for (const auto& g : w.lexicon.groups()) {
      for (const auto& word : g) CHECK_MESSAGE(body_words.count(word) == 1, word);
    }
  }
  CHECK(synthetic_document(0, 42) != synthetic_document(1, 42));
  CHECK(synthetic_document(0, 42) != synthetic_document(0, 43));
}

TEST_CASE("suite config json round trip") {
  auto c = tiny_suite();
  c.noise_sd = 0.25;
  c.weight_scale = 1.5;
  const auto back = suite_config_from_json(to_json(c));
  CHECK(back.documents == 2);
  CHECK(back.search.iterations == 3);
  CHECK(back.noise_sd == 0.25);
  CHECK(back.weight_scale == 1.5);
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS(suite_config_from_json(nlohmann::json{{"documents", 0}}));
  CHECK(reviewer_spec(c).feature_weights.at("novel") == doctest::Approx(0.35 * 1.5));
}

TEST_CASE("a small suite keeps its invariants and is reproducible byte for byte") {
  const auto c = tiny_suite();
  const auto a = run_suite(c);
  const auto b = run_suite(c);
  REQUIRE(a.runs.size() == 4);
  const auto s = summarize(a);
  CHECK(s.filter_violations == 0);
  CHECK(s.monotonicity_violations == 0);
  CHECK(s.budget_violations == 0);
  for (const auto& r : a.runs) {
    CHECK(r.paa_generation_attempts == c.search.generation_budget());
    CHECK(r.baseline_generation_attempts == c.search.generation_budget());
    CHECK(r.paa_reviewer_calls <= c.search.review_budget());
    CHECK(r.defended_random.size() == 3);
    CHECK(r.pool_entries_checked > 0);
  }

  const auto root = fs::temp_directory_path() / ("paraprobe-sim-" + std::to_string(::getpid()));
  fs::remove_all(root);
  write_suite_outputs(a, (root / "a").string());
  write_suite_outputs(b, (root / "b").string());
  int files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const auto other = root / "b" / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK_MESSAGE(read_file(entry.path().string()) == read_file(other.string()), entry.path().filename().string());
  }
  CHECK(files == 7);
  fs::remove_all(root);
}

TEST_CASE("suite checks name every criterion") {
  auto c = tiny_suite();
  c.documents = 1;
  const auto r = run_suite(c);
  std::set<std::string> names;
  for (const auto& ch : suite_checks(r, summarize(r))) names.insert(ch.name);
  CHECK(names == std::set<std::string>{"ordering", "paa-beats-baseline", "filter-soundness", "monotonicity", "budget",
                                       "defense-abst", "defense-random", "detection-auc"});
}
