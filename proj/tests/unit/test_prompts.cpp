#include <filesystem>

#include "doctest.h"
#include "paraprobe/core/error.hpp"
#include "paraprobe/prompts/conference.hpp"
#include "paraprobe/prompts/prompts.hpp"

using namespace paraprobe;
using namespace paraprobe::prompts;

TEST_CASE("five builtin venues with their score fields among the criteria") {
  const auto& all = builtin_conferences();
  REQUIRE(all.size() == 5);
  for (const auto& c : all) {
    CHECK_NOTHROW(c.validate());
    CHECK(std::find(c.criteria.begin(), c.criteria.end(), c.score_field_name) != c.criteria.end());
  }
  CHECK(find_conference("ICLR").scale == scales::iclr());
  CHECK(find_conference("acl").scale == scales::acl());
  CHECK(find_conference("NeurIPS 2025").id == "neurips");
}

TEST_CASE("unknown venue names the known ones") {
  try {
    find_conference("cvpr");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidConfig);
    const std::string msg = e.what();
    for (const auto* id : {"acl", "neurips", "icml", "iclr", "aaai"}) CHECK(msg.find(id) != std::string::npos);
  }
}

TEST_CASE("bundled venue files match the builtins") {
  const auto loaded = load_conferences(std::string(PARAPROBE_SOURCE_DIR) + "/assets/conferences");
  REQUIRE(loaded.size() == 5);
  for (const auto& c : loaded) {
    const auto& b = find_conference(c.id);
    CHECK(c.name == b.name);
    CHECK(c.criteria == b.criteria);
    CHECK(c.scale == b.scale);
    CHECK(c.score_field_name == b.score_field_name);
    CHECK(c.guideline_text == b.guideline_text);
  }
}

TEST_CASE("a venue whose criteria miss the score field is rejected") {
  const nlohmann::json j = {{"name", "X"},
                            {"criteria", {"Summary"}},
                            {"scale", {{"min", 1}, {"max", 5}, {"increment", 1}}},
                            {"score_field_name", "Overall"}};
  CHECK_THROWS_AS(conference_from_json(j, "x", "."), Error);
}

TEST_CASE("paraphrase prompts round trip through the parser") {
  const std::string original = "We present a new method.\n\nIt works well.";
  const auto zs = parse_paraphrase_prompt(build_zero_shot_prompt(original));
  CHECK(zs.original == original);
  CHECK(zs.examples.empty());

  const std::vector<IclExample> ex{{"First version.", 3.5}, {"Second\nversion.", 4.0}};
  const auto icl = parse_paraphrase_prompt(build_icl_prompt(original, ex));
  CHECK(icl.original == original);
  REQUIRE(icl.examples.size() == 2);
  CHECK(icl.examples[0].text == "First version.");
  CHECK(icl.examples[0].score == 3.5);
  CHECK(icl.examples[1].text == "Second\nversion.");
  CHECK(icl.examples[1].score == 4.0);

  CHECK_THROWS_AS(build_icl_prompt(original, {}), Error);
  CHECK_THROWS_AS(parse_paraphrase_prompt("hello"), Error);
}

TEST_CASE("reviewer prompts carry venue, guideline and criteria") {
  for (const auto& conf : builtin_conferences()) {
    for (const auto id : all_template_ids()) {
      const auto& tmpl = builtin_template(id);
      const auto prompt = build_reviewer_prompt(conf, tmpl);
      CHECK(prompt.find(conf.name) != std::string::npos);
      CHECK(prompt.find("{CONFERENCE}") == std::string::npos);
      CHECK(prompt.find("{GUIDELINE}") == std::string::npos);
      CHECK(detect_template(prompt) == id);
      CHECK(criteria_from_prompt(prompt, id) == conf.criteria);
    }
  }
}

TEST_CASE("review parsing round trips on every venue and template") {
  int pairs = 0;
  for (const auto& conf : builtin_conferences()) {
    for (const auto id : all_template_ids()) {
      const auto& tmpl = builtin_template(id);
      bool all_ok = true;
      for (const auto& v : conf.scale.values()) {
        std::vector<std::pair<std::string, std::string>> sections;
        for (const auto& c : conf.criteria) sections.emplace_back(c, "Text for " + c + ".");
        const auto raw = render_review(tmpl, sections, v);
        const auto parsed = parse_review(raw, tmpl, conf.scale);
        all_ok = all_ok && parsed.score == v && parsed.template_id == id;
      }
      CHECK_MESSAGE(all_ok, conf.id << " x " << to_string(id));
      if (all_ok) ++pairs;
    }
  }
  CHECK(pairs == 15);
}

TEST_CASE("off-lattice and out-of-range scores are rejected") {
  const auto& iclr = find_conference("iclr");
  const auto& tmpl = builtin_template(TemplateId::kDelimiters);
  try {
    parse_review("Fine paper.\n\n" + tmpl.score_marker + "\n7", tmpl, iclr.scale);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidScore);
  }
  CHECK(parse_review("x\n" + tmpl.score_marker + "\n7", tmpl, iclr.scale, {true}).score == Rational(8));
  CHECK_THROWS_AS(parse_review("x\n" + tmpl.score_marker + "\n12", tmpl, iclr.scale), Error);
  CHECK_THROWS_AS(parse_review("x\n" + tmpl.score_marker + "\nnone", tmpl, iclr.scale), Error);
  try {
    parse_review("no marker here", tmpl, iclr.scale);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingMarker);
  }
}

TEST_CASE("the last marker wins and extra prose is flagged") {
  const auto& acl = find_conference("acl");
  const auto& tmpl = builtin_template(TemplateId::kMarkdown);
  const auto out = parse_review("a\n" + tmpl.score_marker + "\n2\nb\n" + tmpl.score_marker + "\n4.5\nThanks!", tmpl,
                                acl.scale);
  CHECK(out.score == Rational(9, 2));
  CHECK(out.marker_occurrences == 2);
  CHECK(out.trailing_prose);
  const auto plain = parse_review("content\n" + tmpl.score_marker + ": 3", tmpl, acl.scale);
  CHECK(plain.score == Rational(3));
  CHECK(plain.content == "content");
  CHECK_FALSE(plain.trailing_prose);
}

TEST_CASE("template ids parse by name") {
  for (const auto id : all_template_ids()) CHECK(parse_template_id(to_string(id)) == id);
  CHECK_THROWS_AS(parse_template_id("yaml"), Error);
}

TEST_CASE("template bodies load from disk") {
  const auto t = load_template(TemplateId::kNumbered, std::string(PARAPROBE_SOURCE_DIR) + "/assets/templates/numbered.txt");
  CHECK(t.body == builtin_template(TemplateId::kNumbered).body);
  CHECK(t.score_marker == builtin_template(TemplateId::kNumbered).score_marker);
}
