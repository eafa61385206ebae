#include "paraprobe/sim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <random>

#include "paraprobe/analysis/analysis.hpp"
#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"
#include "paraprobe/defense/defense.hpp"
#include "paraprobe/document/document.hpp"
#include "paraprobe/prompts/conference.hpp"
#include "paraprobe/search/search.hpp"

namespace paraprobe::sim {

namespace {

constexpr std::uint64_t kReviewerSeed = 0x5eed;
constexpr std::uint64_t kEvalTag = 0x6576616c;

struct GroupSpec {
  std::vector<std::pair<std::string, double>> members;  // plain word first
};

// Plain words carry no weight. Each group has one clearly helpful synonym;
// most of the others hurt.
const std::vector<GroupSpec>& group_specs() {
  static const std::vector<GroupSpec> specs{
      {{{"method", 0.0}, {"approach", 0.30}, {"technique", 0.08}, {"framework", -0.12}, {"scheme", -0.22}}},
      {{{"improves", 0.0}, {"enhances", 0.28}, {"boosts", -0.15}, {"advances", 0.10}, {"raises", -0.20}}},
      {{{"results", 0.0}, {"findings", 0.08}, {"outcomes", -0.18}, {"evidence", 0.30}}},
      {{{"shows", 0.0}, {"demonstrates", 0.32}, {"reveals", -0.10}, {"indicates", -0.20}}},
      {{{"new", 0.0}, {"novel", 0.35}, {"fresh", -0.22}, {"original", 0.05}}},
      {{{"good", 0.0}, {"strong", 0.26}, {"solid", 0.06}, {"decent", -0.25}}},
      {{{"careful", 0.0}, {"rigorous", 0.33}, {"thorough", 0.10}, {"detailed", -0.15}}},
      {{{"big", 0.0}, {"large", -0.18}, {"substantial", 0.07}, {"significant", 0.29}}},
      {{{"many", 0.0}, {"several", -0.20}, {"numerous", -0.05}, {"multiple", 0.24}}},
      {{{"tests", 0.0}, {"experiments", 0.27}, {"evaluations", 0.06}, {"trials", -0.20}}},
      {{{"simple", 0.0}, {"efficient", 0.28}, {"lightweight", -0.12}, {"straightforward", -0.18}}},
      {{{"study", 0.0}, {"analysis", 0.25}, {"investigation", -0.08}, {"examination", -0.20}}},
      {{{"task", 0.0}, {"problem", -0.10}, {"challenge", 0.22}, {"setting", -0.16}}},
      {{{"uses", 0.0}, {"leverages", 0.26}, {"employs", 0.04}, {"applies", -0.18}}},
      {{{"clear", 0.0}, {"principled", 0.30}, {"transparent", 0.06}, {"explicit", -0.14}}},
      {{{"gains", 0.0}, {"improvements", 0.24}, {"advantages", -0.06}, {"benefits", -0.17}}},
      {{{"data", 0.0}, {"datasets", 0.05}, {"corpora", -0.19}, {"benchmarks", 0.27}}},
      {{{"work", 0.0}, {"research", -0.12}, {"effort", -0.22}, {"contribution", 0.28}}},
      {{{"idea", 0.0}, {"insight", 0.31}, {"concept", -0.05}, {"notion", -0.18}}},
      {{{"also", 0.0}, {"additionally", -0.16}, {"furthermore", 0.12}, {"moreover", -0.08}}},
  };
  return specs;
}

const std::vector<std::string>& topic_words() {
  static const std::vector<std::string> words{
      "graph",      "neural",      "translation", "parsing",   "retrieval", "summarization", "dialogue",
      "speech",     "vision",      "reasoning",   "alignment", "embedding", "transformer",   "tokenizer",
      "entity",     "relation",    "syntax",      "semantics", "morphology", "question",     "answering",
      "sentiment",  "labeling",    "decoding",    "attention", "memory",    "knowledge",     "domain",
      "adaptation", "multilingual", "contrastive", "sparse",   "latent",    "variational",   "causal",
      "structured", "sequence",    "token",       "span",      "document",  "sentence",      "discourse",
      "coreference", "lexical",    "phonetic",    "visual",    "temporal",  "spatial",       "program",
      "code",       "tabular",     "clinical",    "legal",     "financial", "scientific",    "crosslingual",
  };
  return words;
}

// {T} is a topic word; everything else is literal. Plain lexicon words become
// rewrite sites.
const std::vector<std::string>& abstract_templates() {
  static const std::vector<std::string> t{
      "In this work we present a new method for {T} {T} and {T} {T}.",
      "The task of {T} {T} is hard because {T} {T} data are scarce.",
      "Our idea is simple and clear: it uses {T} {T} to guide {T} {T}.",
      "Many tests on {T} {T} shows big gains over {T} baselines.",
      "We also report a careful study of {T} {T} errors.",
      "The method improves results and good {T} {T} follow.",
  };
  return t;
}

std::string fill(const std::string& tmpl, std::mt19937_64& rng) {
  const auto& topics = topic_words();
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 3, "{T}") == 0) {
      out += topics[std::uniform_int_distribution<std::size_t>(0, topics.size() - 1)(rng)];
      i += 3;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

std::string body_paragraph(const std::vector<std::string>& members, std::mt19937_64& rng) {
  const auto& topics = topic_words();
  const auto topic = [&] { return topics[std::uniform_int_distribution<std::size_t>(0, topics.size() - 1)(rng)]; };
  std::string out;
  for (std::size_t i = 0; i < members.size(); i += 2) {
    if (!out.empty()) out += ' ';
    std::string s = "The " + topic() + " " + members[i];
    if (i + 1 < members.size()) {
      s += " relates to the " + members[i + 1] + " of " + topic() + " " + topic() + ".";
    } else {
      s += " is discussed for " + topic() + " " + topic() + ".";
    }
    out += s;
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string opt_fixed(const std::optional<double>& v, int decimals = 4) {
  return v ? analysis::fixed(*v, decimals) : std::string();
}

/// Shared, immutable pieces of the simulated world for one suite.
struct Bench {
  SuiteConfig cfg;
  prompts::ConferenceConfig conf;
  std::string reviewer_prompt;
  std::shared_ptr<providers::MockGenerator> generator;
  std::shared_ptr<providers::MockReviewer> reviewer;
  std::shared_ptr<providers::MockSimilarity> similarity;
  std::shared_ptr<providers::MockSentiment> sentiment;
  search::ReviewSetup setup;

  explicit Bench(const SuiteConfig& c)
      : cfg(c),
        conf(prompts::find_conference(c.conference)),
        reviewer_prompt(prompts::build_reviewer_prompt(conf, prompts::builtin_template(c.template_id))),
        setup(reviewer_prompt, prompts::builtin_template(c.template_id), conf.scale) {
    generator = std::make_shared<providers::MockGenerator>(default_world().lexicon, c.generator);
    reviewer = std::make_shared<providers::MockReviewer>(reviewer_spec(c), conf.scale);
    similarity = std::make_shared<providers::MockSimilarity>();
    sentiment = std::make_shared<providers::MockSentiment>();
  }

  providers::ProviderSet providers_for(const std::string& document) const {
    providers::ProviderSet p;
    p.generator = generator;
    p.reviewer = reviewer;
    p.similarity = similarity;
    p.perplexity = std::make_shared<providers::MockPerplexity>(document);
    p.sentiment = sentiment;
    return p;
  }

  prompts::ReviewOutput review_once(const providers::ProviderSet& p, const std::string& text,
                                    std::uint64_t seed) const {
    providers::ReviewRequest req;
    req.document_text = text;
    req.reviewer_prompt = reviewer_prompt;
    req.seed = seed;
    return providers::review(*p.reviewer, req, setup.tmpl, setup.scale, p.retry, setup.parse);
  }

  double mean_review(const providers::ProviderSet& p, const std::string& text, std::uint64_t seed) const {
    std::vector<Rational> scores;
    for (int i = 0; i < cfg.search.samples_per_candidate; ++i) {
      scores.push_back(review_once(p, text, derive_seed(seed, {static_cast<std::uint64_t>(i)})).score);
    }
    return mean_of(scores);
  }
};

int count_filter_violations(const search::SearchResult& r, const std::string& original, const SearchConfig& cfg,
                            const providers::SimilarityScorer& sim, const providers::PerplexityScorer& ppl,
                            int& checked) {
  const double ppl_original = ppl.perplexity(original);
  int violations = 0;
  for (const auto& e : r.pool.entries()) {
    ++checked;
    const auto& text = e.candidate.text;
    const double s = sim.similarity(original, text);
    const double ratio = text == original ? 1.0 : ppl.perplexity(text) / ppl_original;
    if (s < cfg.tau_sim || ratio > cfg.alpha_ppl) ++violations;
  }
  return violations;
}

bool non_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) return false;
  }
  return true;
}

RunOutcome run_one(const Bench& bench, int d, int s) {
  const auto& cfg = bench.cfg;
  RunOutcome out;
  out.document = d;
  out.seed = s;
  const auto doc = doc::load_document(synthetic_document(d, cfg.base_seed), DocumentFormat::kLatex);
  const auto p = bench.providers_for(doc.source_text());
  const std::string original(doc.target_text());

  SearchConfig sc = cfg.search;
  sc.seed = derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(s)});

  const auto paa = search::run_search(doc, sc, p, bench.setup);
  const auto base = search::paraphrase_baseline(doc, sc.generation_budget(), sc, p, bench.setup);

  out.paa_search_mean = paa.best.mean_score;
  out.paa_best_so_far = paa.trajectory.best_so_far;
  out.baseline_best_so_far = base.trajectory.best_so_far;
  out.paa_generation_attempts = paa.trajectory.total_generation_attempts();
  out.baseline_generation_attempts = base.trajectory.total_generation_attempts();
  out.paa_reviewer_calls = paa.trajectory.reviewer_calls;
  out.baseline_reviewer_calls = base.trajectory.reviewer_calls;
  for (const auto* r : {&paa, &base}) {
    for (const auto& rec : r->trajectory.records) {
      if (!rec.verdict.passed() && rec.verdict.kind != VerdictKind::kScoreError) ++out.filtered_candidates;
    }
  }

  // post-hoc re-verification with independently constructed scorers
  {
    const providers::MockSimilarity sim;
    const providers::MockPerplexity ppl(doc.source_text());
    out.filter_violations = count_filter_violations(paa, original, sc, sim, ppl, out.pool_entries_checked) +
                            count_filter_violations(base, original, sc, sim, ppl, out.pool_entries_checked);
  }

  const auto eval = derive_seed(sc.seed, {kEvalTag});
  const auto at = [&](std::uint64_t a, std::uint64_t b = 0) { return derive_seed(eval, {a, b}); };
  const auto attacked_doc = doc::with_replacement(doc, paa.best.candidate.text);
  out.original = bench.mean_review(p, doc.source_text(), at(0));
  out.paa = bench.mean_review(p, attacked_doc.source_text(), at(1));
  out.baseline = bench.mean_review(p, doc::apply_patch(doc, base.best.candidate.text).patched_text, at(2));

  if (cfg.run_defenses) {
    const auto abst = defense::defend_abstract(attacked_doc, p, at(3));
    out.defended_abst = bench.mean_review(p, abst.patched_text, at(4));
    const int max_n = std::min<int>(cfg.random_max_n, static_cast<int>(attacked_doc.paragraph_index().size()));
    for (int n = 1; n <= max_n; ++n) {
      const auto patched = defense::defend_random(attacked_doc, p, n, at(5));
      out.defended_random.push_back(bench.mean_review(p, patched.patched_text, at(6)));
    }
  }

  if (cfg.run_detection) {
    analysis::ReviewPair null_pair{bench.review_once(p, doc.source_text(), at(7)),
                                   bench.review_once(p, doc.source_text(), at(8))};
    analysis::ReviewPair attack_pair{null_pair.original_review, bench.review_once(p, attacked_doc.source_text(), at(9))};
    const providers::MockPerplexity reference(null_pair.original_review.content);
    out.unattacked_ppl_ratio = defense::detect_by_ppl(null_pair, reference, 1.0).ppl_ratio;
    out.attacked_ppl_ratio = defense::detect_by_ppl(attack_pair, reference, 1.0).ppl_ratio;
    providers::ProviderSet dp = p;
    dp.perplexity = std::make_shared<providers::MockPerplexity>(null_pair.original_review.content);
    const auto div = analysis::review_divergence(attack_pair, dp);
    out.sentiment_ratio = div.sentiment_ratio;
    out.content_similarity = div.semantic_similarity;
  }
  return out;
}

}  // namespace

const World& default_world() {
  static const World world = [] {
    std::vector<std::vector<std::string>> groups;
    std::map<std::string, double> weights;
    for (const auto& g : group_specs()) {
      std::vector<std::string> members;
      for (const auto& [word, w] : g.members) {
        members.push_back(word);
        if (w != 0.0) weights[word] = w;
      }
      groups.push_back(std::move(members));
    }
    return World{providers::Lexicon(std::move(groups)), std::move(weights)};
  }();
  return world;
}

std::string synthetic_document(int index, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {0x646f63, static_cast<std::uint64_t>(index)}));
  std::string abstract;
  for (const auto& t : abstract_templates()) {
    if (!abstract.empty()) abstract += ' ';
    abstract += fill(t, rng);
  }

  std::vector<std::string> members;
  for (const auto& g : group_specs()) {
    for (const auto& m : g.members) members.push_back(m.first);
  }
  std::shuffle(members.begin(), members.end(), rng);
  constexpr int kParagraphs = 12;
  std::vector<std::vector<std::string>> per(kParagraphs);
  for (std::size_t i = 0; i < members.size(); ++i) per[i % kParagraphs].push_back(members[i]);

  static const std::vector<std::string> sections{"Introduction", "Related Work", "Method", "Experiments",
                                                 "Analysis", "Conclusion"};
  std::string text = "\\documentclass{article}\n\\begin{document}\n\\title{" + fill("{T} {T} for {T}", rng) +
                     "}\n\\maketitle\n\n\\begin{abstract}\n" + abstract + "\n\\end{abstract}\n";
  for (int p = 0; p < kParagraphs; ++p) {
    if (p % 2 == 0) text += "\n\\section{" + sections[static_cast<std::size_t>(p / 2)] + "}\n";
    text += "\n" + body_paragraph(per[static_cast<std::size_t>(p)], rng) + "\n";
  }
  text += "\n\\end{document}\n";
  return text;
}

providers::MockReviewerSpec reviewer_spec(const SuiteConfig& c) {
  providers::MockReviewerSpec spec;
  spec.base_score = Rational::from_double(c.base_score);
  for (const auto& [word, w] : default_world().weights) spec.feature_weights[word] = w * c.weight_scale;
  spec.noise_sd = c.noise_sd;
  spec.seed = kReviewerSeed;
  spec.context_coupling = c.context_coupling;
  spec.body_weight = c.body_weight;
  return spec;
}

SuiteConfig::SuiteConfig() {
  generator.drift_rate = 0.05;
  generator.garble_rate = 0.05;
}

SuiteConfig suite_config_from_json(const nlohmann::json& j, SuiteConfig c) {
  try {
    c.documents = j.value("documents", c.documents);
    c.seeds = j.value("seeds", c.seeds);
    c.base_seed = j.value("base_seed", c.base_seed);
    if (j.contains("search")) c.search = search_config_from_json(j["search"], c.search);
    c.conference = j.value("conference", c.conference);
    if (j.contains("template")) c.template_id = prompts::parse_template_id(j["template"].get<std::string>());
    c.base_score = j.value("base_score", c.base_score);
    c.weight_scale = j.value("weight_scale", c.weight_scale);
    c.noise_sd = j.value("noise_sd", c.noise_sd);
    c.context_coupling = j.value("context_coupling", c.context_coupling);
    c.body_weight = j.value("body_weight", c.body_weight);
    if (j.contains("generator")) {
      const auto& g = j["generator"];
      c.generator.substitution_rate = g.value("substitution_rate", c.generator.substitution_rate);
      c.generator.drift_rate = g.value("drift_rate", c.generator.drift_rate);
      c.generator.garble_rate = g.value("garble_rate", c.generator.garble_rate);
    }
    c.run_defenses = j.value("run_defenses", c.run_defenses);
    c.random_max_n = j.value("random_max_n", c.random_max_n);
    c.run_detection = j.value("run_detection", c.run_detection);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, std::string("suite config: ") + e.what());
  }
  if (c.documents < 1 || c.seeds < 1) throw Error(ErrorKind::kInvalidConfig, "suite needs documents and seeds >= 1");
  validate_config(c.search);
  return c;
}

nlohmann::json to_json(const SuiteConfig& c) {
  return {
      {"documents", c.documents},
      {"seeds", c.seeds},
      {"base_seed", c.base_seed},
      {"search", to_json(c.search)},
      {"conference", c.conference},
      {"template", std::string(prompts::to_string(c.template_id))},
      {"base_score", c.base_score},
      {"weight_scale", c.weight_scale},
      {"noise_sd", c.noise_sd},
      {"context_coupling", c.context_coupling},
      {"body_weight", c.body_weight},
      {"generator",
       {{"substitution_rate", c.generator.substitution_rate},
        {"drift_rate", c.generator.drift_rate},
        {"garble_rate", c.generator.garble_rate}}},
      {"run_defenses", c.run_defenses},
      {"random_max_n", c.random_max_n},
      {"run_detection", c.run_detection},
  };
}

SuiteResult run_suite(const SuiteConfig& config, const Progress& progress) {
  validate_config(config.search);
  const Bench bench(config);
  SuiteResult result;
  result.config = config;
  const int total = config.documents * config.seeds;
  int done = 0;
  for (int d = 0; d < config.documents; ++d) {
    for (int s = 0; s < config.seeds; ++s) {
      result.runs.push_back(run_one(bench, d, s));
      if (progress) progress(++done, total);
    }
  }
  return result;
}

SuiteSummary summarize(const SuiteResult& result) {
  SuiteSummary s;
  const auto& runs = result.runs;
  const auto& cfg = result.config;
  std::vector<double> orig;
  std::vector<double> base;
  std::vector<double> paa;
  int wins = 0;
  for (const auto& r : runs) {
    orig.push_back(r.original);
    base.push_back(r.baseline);
    paa.push_back(r.paa);
    if (r.paa > r.baseline) ++wins;
    s.filter_violations += r.filter_violations;
    if (!non_decreasing(r.paa_best_so_far)) ++s.monotonicity_violations;
    if (!non_decreasing(r.baseline_best_so_far)) ++s.monotonicity_violations;
    const auto budget = cfg.search.generation_budget();
    if (r.paa_generation_attempts != budget || r.baseline_generation_attempts != budget) ++s.budget_violations;
    if (r.paa_reviewer_calls > cfg.search.review_budget() || r.baseline_reviewer_calls > cfg.search.review_budget()) {
      ++s.budget_violations;
    }
  }
  s.mean_original = mean(orig);
  s.mean_baseline = mean(base);
  s.mean_paa = mean(paa);
  s.paa_beats_baseline = runs.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(runs.size());

  if (cfg.run_defenses && !runs.empty()) {
    std::vector<double> abst;
    for (const auto& r : runs) abst.push_back(r.defended_abst.value_or(0.0));
    s.mean_defended_abst = mean(abst);
    int between = 0;
    for (int seed = 0; seed < cfg.seeds; ++seed) {
      std::vector<double> o;
      std::vector<double> a;
      std::vector<double> p;
      for (const auto& r : runs) {
        if (r.seed != seed) continue;
        o.push_back(r.original);
        a.push_back(r.defended_abst.value_or(0.0));
        p.push_back(r.paa);
      }
      if (mean(o) < mean(a) && mean(a) < mean(p)) ++between;
    }
    s.abst_between_fraction = static_cast<double>(between) / static_cast<double>(cfg.seeds);

    std::size_t max_n = runs.front().defended_random.size();
    for (const auto& r : runs) max_n = std::min(max_n, r.defended_random.size());
    for (std::size_t n = 0; n < max_n; ++n) {
      std::vector<double> adv;
      for (const auto& r : runs) adv.push_back(r.defended_random[n] - r.original);
      s.random_advantage.push_back(mean(adv));
    }
    if (s.random_advantage.size() >= 3) {
      std::vector<double> xs;
      for (std::size_t n = 0; n < s.random_advantage.size(); ++n) xs.push_back(static_cast<double>(n + 1));
      try {
        const auto sp = analysis::spearman(xs, s.random_advantage);
        s.random_rho = sp.rho;
        s.random_rho_p = sp.p_value;
      } catch (const Error&) {
      }
    }
  }

  if (cfg.run_detection) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (const auto& r : runs) {
      if (r.attacked_ppl_ratio) pos.push_back(*r.attacked_ppl_ratio);
      if (r.unattacked_ppl_ratio) neg.push_back(*r.unattacked_ppl_ratio);
    }
    if (!pos.empty() && !neg.empty()) s.detection_auc = analysis::auc(pos, neg);
  }
  return s;
}

std::vector<Check> suite_checks(const SuiteResult& result, const SuiteSummary& s) {
  std::vector<Check> checks;
  const auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };
  add("ordering", s.mean_paa > s.mean_baseline && s.mean_baseline > s.mean_original,
      "paa " + analysis::fixed(s.mean_paa, 4) + " > paraphrase " + analysis::fixed(s.mean_baseline, 4) +
          " > original " + analysis::fixed(s.mean_original, 4));
  add("paa-beats-baseline", s.paa_beats_baseline >= 0.9,
      analysis::fixed(100.0 * s.paa_beats_baseline, 1) + "% of runs (need >= 90%)");
  int checked = 0;
  for (const auto& r : result.runs) checked += r.pool_entries_checked;
  add("filter-soundness", s.filter_violations == 0,
      std::to_string(s.filter_violations) + " violations in " + std::to_string(checked) + " pool entries");
  add("monotonicity", s.monotonicity_violations == 0,
      std::to_string(s.monotonicity_violations) + " decreasing best-so-far series");
  add("budget", s.budget_violations == 0, std::to_string(s.budget_violations) + " runs off budget");
  if (result.config.run_defenses) {
    add("defense-abst", s.abst_between_fraction >= 0.8,
        analysis::fixed(100.0 * s.abst_between_fraction, 1) + "% of seeds strictly between (need >= 80%)");
    const bool ok = s.random_rho && s.random_rho_p && *s.random_rho < 0.0 && *s.random_rho_p < 0.05;
    add("defense-random", ok,
        s.random_rho ? "spearman rho " + opt_fixed(s.random_rho) + ", p " + opt_fixed(s.random_rho_p, 6) +
                           " (need rho < 0, p < 0.05)"
                     : std::string("spearman rho undefined for constant scores (need rho < 0, p < 0.05)"));
  }
  if (result.config.run_detection) {
    add("detection-auc", s.detection_auc && *s.detection_auc > 0.5,
        "AUC " + opt_fixed(s.detection_auc) + " (need > 0.5)");
  }
  return checks;
}

void write_suite_outputs(const SuiteResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
  const auto summary = summarize(result);
  const auto checks = suite_checks(result, summary);
  const auto& cfg = result.config;
  const auto& runs = result.runs;
  const auto& scale = prompts::find_conference(cfg.conference).scale;

  // condition table
  {
    std::vector<double> orig;
    std::vector<double> base;
    std::vector<double> paa;
    std::vector<double> abst;
    for (const auto& r : runs) {
      orig.push_back(r.original);
      base.push_back(r.baseline);
      paa.push_back(r.paa);
      if (r.defended_abst) abst.push_back(*r.defended_abst);
    }
    const auto p_vs = [](const std::vector<double>& a, const std::vector<double>& b) -> std::string {
      if (a.size() != b.size() || a.empty()) return "-";
      std::vector<double> d;
      for (std::size_t i = 0; i < a.size(); ++i) d.push_back(a[i] - b[i]);
      try {
        return analysis::fixed(analysis::wilcoxon_signed_rank(d).p_value, 6);
      } catch (const Error&) {
        return "-";
      }
    };
    std::vector<std::vector<std::string>> rows;
    const auto row = [&](const std::string& name, const std::vector<double>& v) {
      rows.push_back({name, analysis::fixed(mean(v), 4), analysis::fixed(mean(v) - mean(orig), 4), p_vs(v, orig),
                      p_vs(v, base)});
    };
    row("Original", orig);
    row("Paraphrase", base);
    row("PAA", paa);
    if (!abst.empty()) row("PAA + Abst defense", abst);
    for (std::size_t n = 0; n < summary.random_advantage.size(); ++n) {
      std::vector<double> v;
      for (const auto& r : runs) v.push_back(r.defended_random[n]);
      row("PAA + Random(" + std::to_string(n + 1) + ")", v);
    }
    std::string text = "Simulated suite: " + std::to_string(cfg.documents) + " documents x " +
                       std::to_string(cfg.seeds) + " seeds, conference " + cfg.conference + ", template " +
                       std::string(prompts::to_string(cfg.template_id)) + ", K=" +
                       std::to_string(cfg.search.candidates_per_step) + " N=" +
                       std::to_string(cfg.search.samples_per_candidate) + " T=" +
                       std::to_string(cfg.search.iterations) + "\n\n";
    text += analysis::render_table({"Condition", "Mean score", "Delta", "p vs Original", "p vs Paraphrase"}, rows);
    text += "\nWilcoxon signed-rank, two-sided, paired by (document, seed).\n\nChecks\n";
    for (const auto& c : checks) text += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
    write_file(path("table.txt"), text);
  }

  // summary.json
  {
    nlohmann::json checks_json = nlohmann::json::array();
    for (const auto& c : checks) checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
    nlohmann::json j = {
        {"config", to_json(cfg)},
        {"runs", runs.size()},
        {"mean_original", summary.mean_original},
        {"mean_paraphrase", summary.mean_baseline},
        {"mean_paa", summary.mean_paa},
        {"paa_beats_paraphrase_fraction", summary.paa_beats_baseline},
        {"mean_defended_abst", opt(summary.mean_defended_abst)},
        {"abst_between_fraction", summary.abst_between_fraction},
        {"random_advantage", summary.random_advantage},
        {"random_spearman_rho", opt(summary.random_rho)},
        {"random_spearman_p", opt(summary.random_rho_p)},
        {"detection_auc", opt(summary.detection_auc)},
        {"filter_violations", summary.filter_violations},
        {"monotonicity_violations", summary.monotonicity_violations},
        {"budget_violations", summary.budget_violations},
        {"checks", checks_json},
    };
    write_file(path("summary.json"), j.dump(2) + "\n");
  }

  // runs.csv
  {
    std::string csv =
        "document,seed,original,paraphrase,paa,paa_search_mean,defended_abst,filtered_candidates,filter_violations,"
        "paa_generation_attempts,paa_reviewer_calls\n";
    for (const auto& r : runs) {
      csv += std::to_string(r.document) + "," + std::to_string(r.seed) + "," + analysis::fixed(r.original, 4) + "," +
             analysis::fixed(r.baseline, 4) + "," + analysis::fixed(r.paa, 4) + "," +
             analysis::fixed(r.paa_search_mean, 4) + "," + opt_fixed(r.defended_abst) + "," +
             std::to_string(r.filtered_candidates) + "," + std::to_string(r.filter_violations) + "," +
             std::to_string(r.paa_generation_attempts) + "," + std::to_string(r.paa_reviewer_calls) + "\n";
    }
    write_file(path("runs.csv"), csv);
  }

  // best_so_far.csv: per-iteration improvement over the original, averaged
  {
    std::string csv = "method,iteration,mean_best_so_far,mean_improvement\n";
    for (const auto& [name, pick] :
         std::vector<std::pair<std::string, std::function<const std::vector<double>&(const RunOutcome&)>>>{
             {"paa", [](const RunOutcome& r) -> const std::vector<double>& { return r.paa_best_so_far; }},
             {"paraphrase", [](const RunOutcome& r) -> const std::vector<double>& { return r.baseline_best_so_far; }}}) {
      std::size_t len = 0;
      for (const auto& r : runs) len = std::max(len, pick(r).size());
      for (std::size_t t = 0; t < len; ++t) {
        std::vector<double> best;
        std::vector<double> imp;
        for (const auto& r : runs) {
          const auto& v = pick(r);
          if (v.empty()) continue;
          const double b = t < v.size() ? v[t] : v.back();
          best.push_back(b);
          imp.push_back(b - r.original);
        }
        csv += name + "," + std::to_string(t) + "," + analysis::fixed(mean(best), 4) + "," +
               analysis::fixed(mean(imp), 4) + "\n";
      }
    }
    write_file(path("best_so_far.csv"), csv);
  }

  // defense.csv
  if (cfg.run_defenses) {
    std::string csv = "setting,n,mean_score,advantage,change_ratio,normalized_difference\n";
    const auto line = [&](const std::string& setting, int n, double score) {
      const auto rate = defense::change_rate(score, summary.mean_original, scale);
      csv += setting + "," + std::to_string(n) + "," + analysis::fixed(score, 4) + "," +
             analysis::fixed(score - summary.mean_original, 4) + "," + opt_fixed(rate.ratio) + "," +
             analysis::fixed(rate.normalized_difference, 4) + "\n";
    };
    line("paa", 0, summary.mean_paa);
    if (summary.mean_defended_abst) line("abst", 0, *summary.mean_defended_abst);
    for (std::size_t n = 0; n < summary.random_advantage.size(); ++n) {
      line("random", static_cast<int>(n + 1), summary.mean_original + summary.random_advantage[n]);
    }
    write_file(path("defense.csv"), csv);
  }

  // detection.csv
  if (cfg.run_detection) {
    std::string csv = "document,seed,label,ppl_ratio,normalized_score_diff,sentiment_ratio,content_similarity\n";
    for (const auto& r : runs) {
      const double diff = analysis::minmax_normalize(r.paa, scale) - analysis::minmax_normalize(r.original, scale);
      csv += std::to_string(r.document) + "," + std::to_string(r.seed) + ",unattacked," +
             opt_fixed(r.unattacked_ppl_ratio) + ",0,,\n";
      csv += std::to_string(r.document) + "," + std::to_string(r.seed) + ",attacked," +
             opt_fixed(r.attacked_ppl_ratio) + "," + analysis::fixed(diff, 4) + "," + opt_fixed(r.sentiment_ratio) +
             "," + opt_fixed(r.content_similarity) + "\n";
    }
    write_file(path("detection.csv"), csv);
  }

  // records.json in the analysis fixture format
  {
    auto records = nlohmann::json::array();
    const auto rec = [&](const RunOutcome& r, const std::string& condition, double score) {
      analysis::RunRecord rr;
      rr.paper_id = "doc" + std::to_string(r.document) + "-seed" + std::to_string(r.seed);
      rr.conference = cfg.conference;
      rr.attacker_id = "mock-generator";
      rr.optimizer_reviewer_id = "mock-reviewer";
      rr.evaluator_reviewer_id = "mock-reviewer";
      rr.condition = condition;
      rr.mean_score = score;
      records.push_back(analysis::to_json(rr));
    };
    for (const auto& r : runs) {
      rec(r, "original", r.original);
      rec(r, "paraphrase", r.baseline);
      rec(r, "paa", r.paa);
      if (r.defended_abst) rec(r, "defended-abst", *r.defended_abst);
      for (std::size_t n = 0; n < r.defended_random.size(); ++n) {
        rec(r, "defended-random(" + std::to_string(n + 1) + ")", r.defended_random[n]);
      }
    }
    write_file(path("records.json"), nlohmann::json{{"records", records}}.dump(1) + "\n");
  }
}

}  // namespace paraprobe::sim
