#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "paraprobe/analysis/analysis.hpp"
#include "paraprobe/core/error.hpp"
#include "paraprobe/providers/mock.hpp"

using namespace paraprobe;
using namespace paraprobe::analysis;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return std::string(PARAPROBE_SOURCE_DIR) + "/fixtures/" + name; }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a throw");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("wilcoxon small cases") {
  const auto r = wilcoxon_signed_rank({1, 2, 3});
  CHECK(r.exact);
  CHECK(r.n == 3);
  CHECK(r.w_plus == 6.0);
  CHECK(r.p_value == doctest::Approx(0.25));
  CHECK(wilcoxon_signed_rank({1, -2, 0, 3}).n == 3);
  CHECK(kind_of([] { wilcoxon_signed_rank({0, 0}); }) == ErrorKind::kAllZeroDiffs);
}

TEST_CASE("exact wilcoxon matches sign enumeration on 200 random vectors") {
  std::mt19937_64 rng(17);
  int mismatches = 0;
  for (int c = 0; c < 200; ++c) {
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<double> d;
    for (int i = 0; i < n; ++i) {
      // small integer grid so ties and zeros show up
      d.push_back(static_cast<double>(static_cast<int>(rng() % 9) - 4) * 0.5);
    }
    if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) d[0] = 1.5;
    const auto got = wilcoxon_signed_rank(d);
    const auto want = oracle::wilcoxon_p(d);
    if (std::fabs(got.p_value - want) > 1e-12) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("normal approximation with continuity correction") {
  std::vector<double> d;
  for (int i = 1; i <= 10; ++i) d.push_back(i);
  const auto approx = wilcoxon_signed_rank(d, 0);
  CHECK_FALSE(approx.exact);
  // z = (27.5 - 0.5) / sqrt(10 * 11 * 21 / 24)
  CHECK(approx.p_value == doctest::Approx(std::erfc(27.0 / std::sqrt(96.25) / std::sqrt(2.0))).epsilon(1e-9));
  CHECK(wilcoxon_signed_rank(d).p_value == doctest::Approx(2.0 / 1024.0));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.3, 1.0);
  for (int c = 0; c < 20; ++c) {
    std::vector<double> v;
    for (int i = 0; i < 20; ++i) v.push_back(g(rng));
    CHECK(wilcoxon_signed_rank(v, 0).p_value == doctest::Approx(wilcoxon_signed_rank(v, 25).p_value).epsilon(0.03));
  }
}

TEST_CASE("spearman matches the permutation oracle") {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 30; ++c) {
    const int n = 3 + static_cast<int>(rng() % 6);
    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i < n; ++i) {
      x.push_back(static_cast<double>(rng() % 5));
      y.push_back(static_cast<double>(rng() % 5));
    }
    if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) x[0] += 1;
    if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) y[0] += 1;
    const auto s = spearman(x, y);
    CHECK(s.exact);
    CHECK(s.rho == doctest::Approx(oracle::spearman_rho(x, y)).epsilon(1e-12));
    CHECK(s.p_value == doctest::Approx(oracle::spearman_p(x, y)).epsilon(1e-9));
  }
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < 15; ++i) {
    x.push_back(i);
    y.push_back(-2.0 * i);
  }
  const auto big = spearman(x, y);
  CHECK_FALSE(big.exact);
  CHECK(big.rho == doctest::Approx(-1.0));
  CHECK(big.p_value < 1e-6);
  CHECK(kind_of([] { spearman({1, 2}, {1, 2}); }) == ErrorKind::kDegenerate);
  CHECK(kind_of([] { spearman({1, 1, 1}, {1, 2, 3}); }) == ErrorKind::kDegenerate);
}

TEST_CASE("auc, ranks, ols and normalisation") {
  CHECK(auc({3, 4}, {1, 2}) == 1.0);
  CHECK(auc({1}, {1}) == 0.5);
  std::mt19937_64 rng(8);
  for (int c = 0; c < 20; ++c) {
    std::vector<double> p;
    std::vector<double> q;
    for (int i = 0; i < 7; ++i) p.push_back(static_cast<double>(rng() % 6));
    for (int i = 0; i < 5; ++i) q.push_back(static_cast<double>(rng() % 6));
    CHECK(auc(p, q) == doctest::Approx(oracle::auc(p, q)));
    CHECK(average_ranks(p) == oracle::ranks(p));
  }
  const auto fit = ols({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(minmax_normalize(3.0, scales::acl()) == doctest::Approx(0.5));
  CHECK(minmax_normalize(10.0, scales::iclr()) == 1.0);
  CHECK(kind_of([] { minmax_normalize(6.0, scales::acl()); }) == ErrorKind::kOutOfRange);
}

TEST_CASE("matched and mismatched averages reproduce the transfer table") {
  const auto records = load_records(fixture("table3.json"));
  const auto m = transfer_matrix(records);
  const std::map<std::string, std::pair<double, double>> expected{
      {"GPT-4o", {4.2, 3.5}}, {"Gemini 2.5", {4.3, 3.2}}, {"Sonnet 4", {4.5, 3.8}}};
  for (const auto& [opt, want] : expected) {
    REQUIRE(m.cell(opt, opt).has_value());
    CHECK(*m.cell(opt, opt) == doctest::Approx(want.first));
    REQUIRE(m.off_diagonal_mean(opt).has_value());
    CHECK(*m.off_diagonal_mean(opt) == doctest::Approx(want.second));
    CHECK(*m.cell(opt, opt) >= *m.off_diagonal_mean(opt));
    CHECK(m.original.at(opt) == doctest::Approx(2.7));
  }
  CHECK(m.missing.empty());

  const auto rows = self_preference_table(records);
  REQUIRE(rows.size() == 3);
  const std::map<std::string, double> deltas{{"GPT-4o", 1.5}, {"Gemini 2.5", 1.6}, {"Sonnet 4", 1.8}};
  for (const auto& r : rows) {
    CHECK(r.matched_delta == doctest::Approx(deltas.at(r.attacker)).epsilon(1e-12));
    REQUIRE(r.mismatched_delta.has_value());
    CHECK(r.matched_delta > *r.mismatched_delta);
    CHECK(r.mismatched_evaluators == 2);
  }
}

TEST_CASE("review gap reproduces the ICLR differences and significance marks") {
  const auto report = actual_review_gap(load_records(fixture("table4_gap.json")));
  // mean difference, significant vs original, significant vs paraphrase
  const std::map<std::string, std::tuple<double, bool, bool>> expected{
      {"original", {-0.4, false, false}},     {"paraphrase", {0.1, false, false}},
      {"paa:GPT-4o", {1.3, true, true}},      {"paa:Gemini 2.5", {1.6, true, true}},
      {"paa:Sonnet 4", {1.9, true, true}},    {"paa:OLMo 3", {1.3, true, true}},
      {"paa:Qwen 3", {0.9, true, false}},
  };
  REQUIRE(report.rows.size() == expected.size());
  for (const auto& row : report.rows) {
    const auto& [mean, vs_orig, vs_para] = expected.at(row.condition);
    CHECK_MESSAGE(row.mean_difference == doctest::Approx(mean).epsilon(1e-9), row.condition);
    CHECK(row.pairs == 12);
    if (row.condition.rfind("paa:", 0) == 0) {
      REQUIRE(row.p_vs_original.has_value());
      REQUIRE(row.p_vs_paraphrase.has_value());
      CHECK_MESSAGE((*row.p_vs_original < 0.01) == vs_orig, row.condition);
      CHECK_MESSAGE((*row.p_vs_paraphrase < 0.01) == vs_para, row.condition);
    }
  }
  CHECK(report.warnings.empty());
}

TEST_CASE("record validation") {
  CHECK(kind_of([] { records_from_json(json::array()); }) == ErrorKind::kMalformedRecords);
  CHECK(kind_of([] { records_from_json(json{{"rows", 1}}); }) == ErrorKind::kMalformedRecords);
  const json bad_condition = json::array({{{"paper_id", "p"}, {"evaluator", "e"}, {"condition", "x"}, {"score", 3}}});
  CHECK(kind_of([&] { records_from_json(bad_condition); }) == ErrorKind::kMalformedRecords);
  const json off_scale =
      json::array({{{"paper_id", "p"}, {"conference", "acl"}, {"evaluator", "e"}, {"condition", "paa"}, {"score", 6}}});
  CHECK(kind_of([&] { records_from_json(off_scale); }) == ErrorKind::kMalformedRecords);
  const json no_original = json::array(
      {{{"paper_id", "p"}, {"attacker", "a"}, {"evaluator", "e"}, {"condition", "paa"}, {"score", 3}}});
  CHECK(kind_of([&] { self_preference_table(records_from_json(no_original)); }) == ErrorKind::kMissingBaseline);
  CHECK(kind_of([] { load_records("/nonexistent/records.json"); }) == ErrorKind::kIo);
  CHECK(is_known_condition("defended-random(3)"));
  CHECK_FALSE(is_known_condition("defended-random()"));
}

TEST_CASE("unpaired gap records are dropped with a warning") {
  const json j = json::array({
      {{"paper_id", "a"}, {"condition", "actual"}, {"score", 4}},
      {{"paper_id", "a"}, {"evaluator", "r"}, {"condition", "original"}, {"score", 5}},
      {{"paper_id", "b"}, {"evaluator", "r"}, {"condition", "original"}, {"score", 3}},
  });
  const auto report = actual_review_gap(records_from_json(j));
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].mean_difference == 1.0);
  CHECK(report.warnings.size() == 1);
}

TEST_CASE("review divergence") {
  providers::ProviderSet p;
  p.similarity = std::make_shared<providers::MockSimilarity>();
  p.perplexity = std::make_shared<providers::MockPerplexity>("the paper is strong and clear");
  p.sentiment = std::make_shared<providers::MockSentiment>();
  ReviewPair pair;
  pair.original_review.content = "The paper is good but weak in places.";
  pair.attacked_review.content = "The paper is excellent and strong.";
  const auto d = review_divergence(pair, p);
  REQUIRE(d.sentiment_ratio.has_value());
  CHECK(*d.sentiment_ratio == doctest::Approx(2.0));
  CHECK(d.semantic_similarity > 0.0);
  CHECK(d.semantic_similarity < 1.0);
  pair.original_review.content = "weak";
  CHECK_FALSE(review_divergence(pair, p).sentiment_ratio.has_value());
  pair.attacked_review.content = "weak";
  CHECK(review_divergence(pair, p).ppl_ratio == 1.0);
}

TEST_CASE("table rendering") {
  const auto t = render_table({"a", "bb"}, {{"1", "2"}, {"333", "4"}});
  CHECK(t.find("333") != std::string::npos);
  CHECK(fixed(-0.0001, 2) == "0.00");
  CHECK(fixed(1.25, 1) == "1.2");
}
