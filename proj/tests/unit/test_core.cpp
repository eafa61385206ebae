#include <atomic>
#include <set>

#include "doctest.h"
#include "paraprobe/core/config.hpp"
#include "paraprobe/core/error.hpp"
#include "paraprobe/core/rational.hpp"
#include "paraprobe/core/score_scale.hpp"
#include "paraprobe/core/trajectory.hpp"
#include "paraprobe/core/types.hpp"
#include "paraprobe/core/util.hpp"

using namespace paraprobe;

TEST_CASE("rational parses decimals exactly and prints minimal form") {
  CHECK(Rational::parse_decimal("3.5") == Rational(7, 2));
  CHECK(Rational::parse_decimal("-2") == Rational(-2));
  CHECK(Rational::parse_decimal("0.25") == Rational(1, 4));
  CHECK(Rational(7, 2).to_string() == "3.5");
  CHECK(Rational(4).to_string() == "4");
  CHECK(Rational(1, 3).to_string() == "1/3");
  CHECK(Rational::from_double(1.8) == Rational(9, 5));
  CHECK_THROWS_AS(Rational::parse_decimal("3.5x"), Error);
  CHECK_THROWS_AS(Rational::parse_decimal(""), Error);
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(1, 2) < Rational(2, 3));
  CHECK(format_score(3.5) == "3.5");
  CHECK(format_score(4.0) == "4");
}

TEST_CASE("score scales form lattices") {
  const auto acl = scales::acl();
  CHECK(acl.lattice_size() == 9);
  CHECK(acl.is_valid_score(3.5));
  CHECK_FALSE(acl.is_valid_score(3.25));
  CHECK_FALSE(acl.is_valid_score(5.5));
  CHECK(acl.nearest(3.74) == Rational(7, 2));
  CHECK(acl.nearest(3.75) == Rational(4));  // ties round up
  CHECK(acl.nearest(-3.0) == Rational(1));
  CHECK(acl.nearest(9.0) == Rational(5));
  const auto iclr = scales::iclr();
  CHECK_FALSE(iclr.is_valid_score(7.0));
  CHECK(iclr.is_valid_score(8.0));
  CHECK(iclr.values().size() == 6);
  CHECK_THROWS_AS(ScoreScale(Rational(1), Rational(2), Rational(2, 3)), Error);
  CHECK_THROWS_AS(ScoreScale(Rational(2), Rational(1), Rational(1)), Error);
}

TEST_CASE("hashing and seed derivation are stable and spread") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(text_hash("abc").size() == 16);
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100; ++i) {
    for (std::uint64_t j = 0; j < 10; ++j) seen.insert(derive_seed(42, {i, j}));
  }
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
}

TEST_CASE("word tokens and trim") {
  CHECK(word_tokens("Hello, World-42!") == std::vector<std::string>{"hello", "world", "42"});
  CHECK(trim("  x y \n") == "x y");
  CHECK(to_lower("AbC") == "abc");
}

TEST_CASE("parallel_for visits every index once and rethrows the lowest failure") {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  try {
    parallel_for(10, 3, [](std::size_t i) {
      if (i == 3 || i == 7) throw Error(ErrorKind::kIo, std::to_string(i));
    });
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("search config budgets and validation") {
  SearchConfig c;
  CHECK(c.generation_budget() == 264);
  CHECK(c.review_budget() == 264 * 8 + 8);
  CHECK(validate_config(c).empty());
  c.candidates_per_step = 0;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.alpha_ppl = 0.9;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.tau_sim = 0.0;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.iterations = 5;
  CHECK(validate_config(c).size() == 1);
  CHECK(c.min_successes(8) == 4);
  CHECK(c.min_successes(1) == 1);
}

TEST_CASE("search config json round trip with shorthands") {
  const auto c = search_config_from_json(nlohmann::json{{"K", 4}, {"N", 16}, {"T", 64}, {"seed", 9}});
  CHECK(c.candidates_per_step == 4);
  CHECK(c.samples_per_candidate == 16);
  CHECK(c.iterations == 64);
  CHECK(c.seed == 9);
  const auto back = search_config_from_json(to_json(c));
  CHECK(back.candidates_per_step == 4);
  CHECK(back.iterations == 64);
  CHECK(parse_icl_mode(to_string(IclMode::kPreviousIteration)) == IclMode::kPreviousIteration);
}

TEST_CASE("source document validates its spans") {
  const std::string text = "0123456789";
  CHECK_NOTHROW(SourceDocument(text, DocumentFormat::kPlain, {2, 5}, {{6, 8}}));
  CHECK_THROWS_AS(SourceDocument(text, DocumentFormat::kPlain, {2, 20}), Error);
  CHECK_THROWS_AS(SourceDocument(text, DocumentFormat::kPlain, {3, 3}), Error);
  CHECK_THROWS_AS(SourceDocument(text, DocumentFormat::kPlain, {2, 5}, {{4, 8}}), Error);
  CHECK_THROWS_AS(SourceDocument(text, DocumentFormat::kPlain, {2, 5}, {{7, 9}, {6, 7}}), Error);
}

namespace {
ScoredCandidate entry(const std::string& text, int iteration, int index, double mean) {
  ScoredCandidate s;
  s.candidate.text = text;
  s.candidate.iteration = iteration;
  s.candidate.index = index;
  s.similarity = 0.9;
  s.ppl_ratio = 1.0;
  s.raw_scores = {Rational::from_double(mean)};
  s.mean_score = mean;
  return s;
}
}  // namespace

TEST_CASE("candidate pool ranks by mean, then earlier iteration, then index") {
  CandidatePool pool(0.85, 1.2);
  CHECK_THROWS_AS(pool.best(), Error);
  pool.append(entry("a", 0, 1, 3.0));
  pool.append(entry("b", 1, 2, 3.5));
  pool.append(entry("c", 2, 1, 3.5));
  pool.append(entry("d", 1, 1, 3.5));
  CHECK(pool.best().candidate.text == "d");
  const auto top = pool.top(3);
  REQUIRE(top.size() == 3);
  CHECK(top[1].candidate.text == "b");
  CHECK(top[2].candidate.text == "c");
  CHECK(pool.latest_iteration() == 2);
  CHECK(pool.from_iteration(1).size() == 2);

  auto bad = entry("e", 3, 1, 4.0);
  bad.similarity = 0.84;
  CHECK_THROWS_AS(pool.append(bad), Error);
  bad = entry("e", 3, 1, 4.0);
  bad.ppl_ratio = 1.2000001;
  CHECK_THROWS_AS(pool.append(bad), Error);
  bad.ppl_ratio = 1.2;
  CHECK_NOTHROW(pool.append(bad));
}

TEST_CASE("trajectory accounting") {
  Trajectory t;
  t.generation_attempts = {8, 8, 8};
  CHECK(t.total_generation_attempts() == 24);
  const auto j = to_json(t);
  CHECK(j.contains("best_so_far"));
  CHECK(verdict_label(VerdictKind::kPass) == "pass");
}

TEST_CASE("errors carry kinds and classify provider failures") {
  const Error e(ErrorKind::kProviderTimeout, "slow");
  CHECK(e.is_provider_error());
  CHECK_FALSE(Error(ErrorKind::kInvalidConfig, "x").is_provider_error());
  CHECK(std::string(e.what()).find("slow") != std::string::npos);
}
