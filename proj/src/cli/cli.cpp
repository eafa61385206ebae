#include "paraprobe/cli/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "paraprobe/analysis/analysis.hpp"
#include "paraprobe/core/error.hpp"
#include "paraprobe/core/trajectory.hpp"
#include "paraprobe/core/util.hpp"
#include "paraprobe/providers/mock.hpp"
#include "paraprobe/providers/remote.hpp"
#include "paraprobe/search/search.hpp"
#include "paraprobe/sim/sim.hpp"

namespace paraprobe::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kReviewTag = 0x636c69726576;

nlohmann::json parse_json_file(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::kInvalidConfig, "config file not found: " + path);
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kInvalidConfig, path + ": " + e.what());
  }
}

providers::ChatModel chat_model_from_json(const nlohmann::json& j) {
  providers::ChatModel m;
  m.model = j.value("model", std::string());
  if (m.model.empty()) throw Error(ErrorKind::kInvalidConfig, "remote model name missing");
  m.max_tokens = j.value("max_tokens", m.max_tokens);
  m.temperature = j.value("temperature", m.temperature);
  m.send_seed = j.value("send_seed", m.send_seed);
  return m;
}

const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  return j.contains(key) ? j.at(key) : empty;
}

int exit_code_for(const Error& e) {
  if (e.is_provider_error() || e.kind() == ErrorKind::kBelowMinimumSuccesses) return kExitProvider;
  switch (e.kind()) {
    case ErrorKind::kAllCandidatesFiltered:
    case ErrorKind::kEmptyPool:
      return kExitEmptyPool;
    case ErrorKind::kInvalidConfig:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kAbstractNotFound:
    case ErrorKind::kMultipleAbstracts:
    case ErrorKind::kCompileFailed:
    case ErrorKind::kHookUnconfigured:
    case ErrorKind::kOutOfRange:
    case ErrorKind::kMissingBaseline:
    case ErrorKind::kNotEnoughParagraphs:
    case ErrorKind::kMalformedRecords:
    case ErrorKind::kDegenerate:
    case ErrorKind::kAllZeroDiffs:
    case ErrorKind::kIo:
      return kExitConfig;
    default:
      return kExitInternal;
  }
}

std::string extension_for(DocumentFormat f) { return f == DocumentFormat::kLatex ? ".tex" : ".txt"; }

SourceDocument read_document(const RunConfig& config, const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "document not found: " + path);
  const auto format = format_for(config, path);
  auto text = format == DocumentFormat::kLatex ? doc::resolve_includes(path) : read_file(path);
  return doc::load_document(std::move(text), format);
}

std::string format_double(double v) { return analysis::fixed(v, 4); }

// Flags shared by every command.
struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string providers;
  std::string out_dir;
};

RunConfig effective_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  if (g.seed) c.search.seed = *g.seed;
  if (!g.providers.empty()) c.providers = g.providers;
  if (c.providers != "mock" && c.providers != "remote") {
    throw Error(ErrorKind::kInvalidConfig, "providers must be 'mock' or 'remote', got '" + c.providers + "'");
  }
  return c;
}

prompts::ReviewOutput review_text(const providers::ProviderSet& p, const search::ReviewSetup& setup,
                                  const std::string& text, std::optional<std::string> attachment,
                                  std::uint64_t seed) {
  providers::ReviewRequest req;
  req.document_text = text;
  req.reviewer_prompt = setup.reviewer_prompt;
  req.attachment_path = std::move(attachment);
  req.seed = seed;
  return providers::review(*p.reviewer, req, setup.tmpl, setup.scale, p.retry, setup.parse);
}

// Compiles when a hook is configured; otherwise the text itself is reviewed.
std::optional<std::string> maybe_compile(const RunConfig& config, const SourceDocument& doc,
                                         const std::string& name) {
  if (!config.compile.configured()) return std::nullopt;
  const auto dir = fs::path(config.work_dir) / name;
  fs::create_directories(dir);
  const auto src = (dir / ("paper" + extension_for(doc.format()))).string();
  write_file(src, doc.source_text());
  return doc::compile_hook(src, config.compile);
}

double mean_review(const providers::ProviderSet& p, const search::ReviewSetup& setup, const RunConfig& config,
                   const SourceDocument& doc, const std::string& name, int samples, std::uint64_t seed) {
  const auto artifact = maybe_compile(config, doc, name);
  std::vector<Rational> scores;
  for (int i = 0; i < samples; ++i) {
    scores.push_back(
        review_text(p, setup, doc.source_text(), artifact, derive_seed(seed, {static_cast<std::uint64_t>(i)})).score);
  }
  return mean_of(scores);
}

// ---------------------------------------------------------------------------
// attack

struct AttackArgs {
  std::string doc_path;
  bool dry_run = false;
  bool own_target = false;
  bool baseline = false;
  std::string conference;
  std::string template_name;
  std::optional<int> k;
  std::optional<int> n;
  std::optional<int> t;
};

int cmd_attack(const Globals& g, const AttackArgs& a, std::ostream& out, std::ostream& err) {
  auto config = effective_config(g);
  if (!a.conference.empty()) config.conference = a.conference;
  if (!a.template_name.empty()) config.template_id = prompts::parse_template_id(a.template_name);
  if (a.k) config.search.candidates_per_step = *a.k;
  if (a.n) config.search.samples_per_candidate = *a.n;
  if (a.t) config.search.iterations = *a.t;
  const auto warnings = validate_config(config.search);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  const auto conference = resolve_conference(config);
  const auto tmpl = resolve_template(config, config.template_id);
  const auto doc = read_document(config, a.doc_path);

  if (a.dry_run) {
    nlohmann::json j = {
        {"config", to_json(config)},
        {"conference", conference.name},
        {"template", std::string(prompts::to_string(tmpl.id))},
        {"document", {{"path", a.doc_path},
                      {"format", std::string(to_string(doc.format()))},
                      {"abstract_bytes", doc.target_span().size()},
                      {"paragraphs", doc.paragraph_index().size()}}},
        {"budget",
         {{"generation_attempts", config.search.generation_budget()},
          {"max_reviewer_calls", config.search.review_budget()}}},
        {"warnings", warnings},
    };
    out << j.dump(2) << "\n";
    return kExitOk;
  }

  if (config.providers == "remote" && !a.own_target) {
    err << "error: attack against a remote reviewer needs --i-own-this-target; this tool is meant for evaluating "
           "reviewers you operate\n";
    return kExitConfig;
  }

  const auto p = make_providers(config, conference, doc.source_text());
  search::ReviewSetup setup(prompts::build_reviewer_prompt(conference, tmpl), tmpl, conference.scale);
  setup.compile = config.compile;
  setup.work_dir = config.work_dir;

  const std::string dir = g.out_dir.empty() ? "paraprobe-out" : g.out_dir;
  fs::create_directories(dir);
  const auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };

  err << "attack: K=" << config.search.candidates_per_step << " N=" << config.search.samples_per_candidate
      << " T=" << config.search.iterations << " seed=" << config.search.seed << " providers=" << config.providers
      << "\n";
  TrajectoryLog log(path("trajectory.jsonl"), path("texts.json"));
  const auto result = search::run_search(doc, config.search, p, setup, search::SearchHooks{&log});
  write_file(path("result.json"), to_json(result, log.log_path()).dump(2) + "\n");
  const auto best_path = path("best" + extension_for(doc.format()));
  write_file(best_path, doc::apply_patch(doc, result.best.candidate.text).patched_text);

  nlohmann::json summary = {
      {"run_id", result.trajectory.run_id},
      {"original_mean_score", result.original_mean_score},
      {"best_mean_score", result.best.mean_score},
      {"improvement", result.improvement()},
      {"generation_attempts", result.trajectory.total_generation_attempts()},
      {"reviewer_calls", result.trajectory.reviewer_calls},
      {"result_path", path("result.json")},
      {"document_path", best_path},
  };
  err << "attack: original " << format_double(result.original_mean_score) << " -> best "
      << format_double(result.best.mean_score) << "\n";

  if (a.baseline) {
    TrajectoryLog blog(path("baseline.jsonl"), path("baseline_texts.json"));
    const auto base = search::paraphrase_baseline(doc, config.search.generation_budget(), config.search, p, setup,
                                                  search::SearchHooks{&blog});
    write_file(path("baseline.json"), to_json(base, blog.log_path()).dump(2) + "\n");
    summary["baseline_mean_score"] = base.best.mean_score;
    summary["baseline_path"] = path("baseline.json");
    err << "attack: paraphrase baseline best " << format_double(base.best.mean_score) << "\n";
  }
  out << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// review

struct ReviewArgs {
  std::string doc_path;
  std::string conference;
  std::string template_name;
  bool all_templates = false;
  int samples = 1;
};

int cmd_review(const Globals& g, const ReviewArgs& a, std::ostream& out, std::ostream& err) {
  auto config = effective_config(g);
  if (!a.conference.empty()) config.conference = a.conference;
  if (!a.template_name.empty()) config.template_id = prompts::parse_template_id(a.template_name);
  if (a.samples < 1) throw Error(ErrorKind::kInvalidArgument, "--samples must be >= 1");
  const auto conference = resolve_conference(config);
  const auto doc = read_document(config, a.doc_path);
  const auto p = make_providers(config, conference, doc.source_text());
  const auto artifact = maybe_compile(config, doc, "review");

  std::vector<prompts::TemplateId> ids{config.template_id};
  if (a.all_templates) ids = prompts::all_template_ids();

  nlohmann::json reviews = nlohmann::json::array();
  std::vector<Rational> scores;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const auto tmpl = resolve_template(config, ids[t]);
    search::ReviewSetup setup(prompts::build_reviewer_prompt(conference, tmpl), tmpl, conference.scale);
    for (int s = 0; s < a.samples; ++s) {
      const auto seed =
          derive_seed(config.search.seed, {kReviewTag, static_cast<std::uint64_t>(ids[t]), static_cast<std::uint64_t>(s)});
      const auto r = review_text(p, setup, doc.source_text(), artifact, seed);
      auto j = to_json(r);
      j["conference"] = conference.name;
      j["sample"] = s;
      reviews.push_back(std::move(j));
      scores.push_back(r.score);
      err << "review: " << prompts::to_string(ids[t]) << " sample " << s << " score " << r.score.to_string() << "\n";
    }
  }
  if (reviews.size() == 1) {
    out << reviews.front().dump(2) << "\n";
  } else {
    out << nlohmann::json{{"reviews", reviews}, {"mean_score", mean_of(scores)}}.dump(2) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// defend

struct DefendArgs {
  std::string doc_path;
  std::string method = "abst";
  int n = 1;
  bool filter = false;
  bool score = false;
  std::string conference;
};

int cmd_defend(const Globals& g, const DefendArgs& a, std::ostream& out, std::ostream& err) {
  auto config = effective_config(g);
  if (!a.conference.empty()) config.conference = a.conference;
  if (a.filter) config.defense.filter = true;
  const auto conference = resolve_conference(config);
  const auto doc = read_document(config, a.doc_path);
  const auto p = make_providers(config, conference, doc.source_text());

  const auto seed = config.search.seed;
  std::string patched;
  nlohmann::json paragraphs = nlohmann::json::array();
  if (a.method == "abst") {
    patched = defense::defend_abstract(doc, p, seed, config.defense).patched_text;
  } else if (a.method == "random") {
    patched = defense::defend_random(doc, p, a.n, seed, config.defense).patched_text;
    for (const auto i : defense::choose_paragraphs(doc.paragraph_index().size(), a.n, seed)) paragraphs.push_back(i);
  } else {
    throw Error(ErrorKind::kInvalidArgument, "--method must be 'abst' or 'random'");
  }

  const std::string dir = g.out_dir.empty() ? "paraprobe-out" : g.out_dir;
  fs::create_directories(dir);
  const auto out_path = (fs::path(dir) / ("defended" + extension_for(doc.format()))).string();
  write_file(out_path, patched);
  nlohmann::json j = {{"method", a.method}, {"output_path", out_path}, {"filter", config.defense.filter}};
  if (a.method == "random") {
    j["n"] = a.n;
    j["paragraphs"] = paragraphs;
  }
  err << "defend: wrote " << out_path << "\n";

  if (a.score) {
    const auto tmpl = resolve_template(config, config.template_id);
    search::ReviewSetup setup(prompts::build_reviewer_prompt(conference, tmpl), tmpl, conference.scale);
    const int samples = config.search.samples_per_candidate;
    const auto defended = doc::load_document(patched, doc.format());
    const double before = mean_review(p, setup, config, doc, "defend-input", samples, derive_seed(seed, {kReviewTag, 0}));
    const double after = mean_review(p, setup, config, defended, "defend-output", samples, derive_seed(seed, {kReviewTag, 1}));
    const auto rate = defense::change_rate(after, before, conference.scale);
    j["input_mean_score"] = before;
    j["defended_mean_score"] = after;
    j["change_ratio"] = rate.ratio ? nlohmann::json(*rate.ratio) : nlohmann::json();
    j["normalized_difference"] = rate.normalized_difference;
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string records_path;
  std::string report;
};

std::string opt_cell(const std::optional<double>& v, int decimals = 2) {
  return v ? analysis::fixed(*v, decimals) : "-";
}

nlohmann::json divergence_report(const RunConfig& config, const std::string& path, std::string& table) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kMalformedRecords, path + ": " + e.what());
  }
  const auto* arr = j.is_array() ? &j : (j.contains("pairs") ? &j.at("pairs") : nullptr);
  if (!arr || !arr->is_array() || arr->empty()) throw Error(ErrorKind::kMalformedRecords, path + ": no review pairs");
  const auto conference = resolve_conference(config);
  const auto review_of = [&](const nlohmann::json& r) {
    prompts::ReviewOutput o;
    o.content = r.at("content").get<std::string>();
    o.score = Rational::from_double(r.at("score").get<double>());
    return o;
  };
  nlohmann::json rows = nlohmann::json::array();
  std::vector<std::vector<std::string>> cells;
  double sum_sent = 0.0;
  int n_sent = 0;
  double sum_sim = 0.0;
  double sum_ppl = 0.0;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    analysis::ReviewPair pair;
    try {
      pair = {review_of(arr->at(i).at("original")), review_of(arr->at(i).at("attacked"))};
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kMalformedRecords, path + ": pair " + std::to_string(i) + ": " + e.what());
    }
    // the reference language model is fitted on the unattacked review
    const auto p = make_providers(config, conference, pair.original_review.content);
    const auto d = analysis::review_divergence(pair, p);
    const double norm_diff = analysis::minmax_normalize(pair.attacked_review.score.to_double(), conference.scale) -
                             analysis::minmax_normalize(pair.original_review.score.to_double(), conference.scale);
    rows.push_back({{"index", i},
                    {"normalized_score_difference", norm_diff},
                    {"sentiment_ratio", d.sentiment_ratio ? nlohmann::json(*d.sentiment_ratio) : nlohmann::json()},
                    {"semantic_similarity", d.semantic_similarity},
                    {"ppl_ratio", d.ppl_ratio}});
    cells.push_back({std::to_string(i), analysis::fixed(norm_diff, 3), opt_cell(d.sentiment_ratio, 3),
                     analysis::fixed(d.semantic_similarity, 3), analysis::fixed(d.ppl_ratio, 3)});
    if (d.sentiment_ratio) {
      sum_sent += *d.sentiment_ratio;
      ++n_sent;
    }
    sum_sim += d.semantic_similarity;
    sum_ppl += d.ppl_ratio;
  }
  const double n = static_cast<double>(arr->size());
  table = analysis::render_table({"Pair", "Score diff (norm)", "Sentiment ratio", "Similarity", "PPL ratio"}, cells);
  return {{"pairs", rows},
          {"mean_sentiment_ratio", n_sent ? nlohmann::json(sum_sent / n_sent) : nlohmann::json()},
          {"mean_semantic_similarity", sum_sim / n},
          {"mean_ppl_ratio", sum_ppl / n}};
}

nlohmann::json defense_report(const std::vector<analysis::RunRecord>& records, std::string& table) {
  // condition -> paper -> scores
  std::map<std::string, std::map<std::string, std::vector<double>>> by;
  std::string conference;
  for (const auto& r : records) {
    by[r.condition][r.paper_id].push_back(r.mean_score);
    if (conference.empty()) conference = r.conference;
  }
  if (!by.count("original")) throw Error(ErrorKind::kMissingBaseline, "defense report needs original records");
  const auto& scale = prompts::find_conference(conference.empty() ? "acl" : conference).scale;
  const auto condition_mean = [](const std::map<std::string, std::vector<double>>& papers) {
    double s = 0.0;
    int n = 0;
    for (const auto& [paper, v] : papers) {
      for (const double x : v) {
        s += x;
        ++n;
      }
    }
    return s / n;
  };
  const double original = condition_mean(by.at("original"));
  std::vector<std::string> order{"original", "paraphrase", "paa", "defended-abst"};
  for (int n = 1; n <= 64; ++n) order.push_back("defended-random(" + std::to_string(n) + ")");
  nlohmann::json rows = nlohmann::json::array();
  std::vector<std::vector<std::string>> cells;
  for (const auto& c : order) {
    const auto it = by.find(c);
    if (it == by.end()) continue;
    const double m = condition_mean(it->second);
    const auto rate = defense::change_rate(m, original, scale);
    rows.push_back({{"condition", c},
                    {"mean_score", m},
                    {"papers", it->second.size()},
                    {"change_ratio", rate.ratio ? nlohmann::json(*rate.ratio) : nlohmann::json()},
                    {"normalized_difference", rate.normalized_difference}});
    cells.push_back({c, analysis::fixed(m, 3), opt_cell(rate.ratio, 3), analysis::fixed(rate.normalized_difference, 3)});
  }
  table = analysis::render_table({"Condition", "Mean score", "Change ratio", "Normalized diff"}, cells);
  return {{"rows", rows}};
}

int cmd_analyze(const Globals& g, const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = effective_config(g);
  nlohmann::json result;
  std::string table;
  if (a.report == "divergence") {
    result = divergence_report(config, a.records_path, table);
  } else {
    const auto records = analysis::load_records(a.records_path);
    if (a.report == "selfpref") {
      const auto rows = analysis::self_preference_table(records);
      result = analysis::to_json(rows);
      std::vector<std::vector<std::string>> cells;
      for (const auto& r : rows) {
        cells.push_back({r.attacker, analysis::fixed(r.matched_delta, 2), opt_cell(r.mismatched_delta)});
      }
      table = analysis::render_table({"Attacker", "Matched delta", "Mismatched delta"}, cells);
    } else if (a.report == "transfer") {
      const auto m = analysis::transfer_matrix(records);
      result = analysis::to_json(m);
      std::vector<std::string> header{"Optimizer \\ Evaluator"};
      header.insert(header.end(), m.evaluators.begin(), m.evaluators.end());
      std::vector<std::vector<std::string>> cells;
      std::vector<std::string> orig{"Original"};
      for (const auto& e : m.evaluators) {
        const auto it = m.original.find(e);
        orig.push_back(it == m.original.end() ? "-" : analysis::fixed(it->second, 2));
      }
      cells.push_back(orig);
      for (const auto& o : m.optimizers) {
        std::vector<std::string> row{o};
        for (const auto& e : m.evaluators) row.push_back(opt_cell(m.cell(o, e)));
        cells.push_back(row);
      }
      table = analysis::render_table(header, cells);
    } else if (a.report == "gap") {
      const auto gap = analysis::actual_review_gap(records);
      result = analysis::to_json(gap);
      std::vector<std::vector<std::string>> cells;
      for (const auto& r : gap.rows) {
        cells.push_back({r.condition, analysis::fixed(r.mean_difference, 2), std::to_string(r.pairs),
                         opt_cell(r.p_vs_actual, 4), opt_cell(r.p_vs_original, 4), opt_cell(r.p_vs_paraphrase, 4)});
      }
      table = analysis::render_table({"Condition", "LLM - actual", "Pairs", "p vs actual", "p vs original",
                                      "p vs paraphrase"},
                                     cells);
      for (const auto& w : gap.warnings) err << "warning: " << w << "\n";
    } else if (a.report == "defense") {
      result = defense_report(records, table);
    } else {
      throw Error(ErrorKind::kInvalidArgument, "unknown report '" + a.report + "'");
    }
  }
  err << table;
  if (!g.out_dir.empty()) {
    fs::create_directories(g.out_dir);
    write_file((fs::path(g.out_dir) / (a.report + ".json")).string(), result.dump(2) + "\n");
    write_file((fs::path(g.out_dir) / (a.report + ".txt")).string(), table);
  }
  out << result.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::optional<int> documents;
  std::optional<int> seeds;
  std::string suite_config;
  bool strict = false;
  bool quiet = false;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = effective_config(g);
  if (config.providers != "mock") throw Error(ErrorKind::kInvalidConfig, "simulate runs against mock providers only");
  sim::SuiteConfig suite;
  if (!config.simulation.empty()) suite = sim::suite_config_from_json(config.simulation, suite);
  if (!a.suite_config.empty()) suite = sim::suite_config_from_json(parse_json_file(a.suite_config), suite);
  if (g.seed) suite.base_seed = *g.seed;
  if (a.documents) suite.documents = *a.documents;
  if (a.seeds) suite.seeds = *a.seeds;
  if (suite.documents < 1 || suite.seeds < 1) throw Error(ErrorKind::kInvalidArgument, "documents and seeds must be >= 1");

  const std::string dir = g.out_dir.empty() ? "paraprobe-sim" : g.out_dir;
  err << "simulate: " << suite.documents << " documents x " << suite.seeds << " seeds\n";
  const auto result = sim::run_suite(suite, [&](int done, int total) {
    if (!a.quiet && (done % 20 == 0 || done == total)) err << "simulate: " << done << "/" << total << " runs\n";
  });
  sim::write_suite_outputs(result, dir);
  const auto summary = sim::summarize(result);
  const auto checks = sim::suite_checks(result, summary);
  err << read_file((fs::path(dir) / "table.txt").string());
  out << read_file((fs::path(dir) / "summary.json").string());

  if (summary.filter_violations || summary.monotonicity_violations || summary.budget_violations) return kExitInternal;
  if (a.strict) {
    for (const auto& c : checks) {
      if (!c.passed) return kExitInternal;
    }
  }
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kInvalidConfig, "run config must be a JSON object");
  RunConfig c;
  try {
    if (j.contains("search")) c.search = search_config_from_json(j.at("search"), c.search);
    c.conference = j.value("conference", c.conference);
    c.conferences_dir = j.value("conferences_dir", c.conferences_dir);
    if (j.contains("template")) c.template_id = prompts::parse_template_id(j.at("template").get<std::string>());
    c.template_path = j.value("template_path", c.template_path);
    c.document_format = j.value("document_format", c.document_format);
    c.providers = j.value("providers", c.providers);
    if (j.contains("mock")) c.mock = j.at("mock");
    if (j.contains("remote")) c.remote = j.at("remote");
    c.retries = j.value("retries", c.retries);
    c.retry_backoff_ms = j.value("retry_backoff_ms", c.retry_backoff_ms);
    if (j.contains("compile")) {
      c.compile.command_template = j.at("compile").value("command", std::string());
      c.compile.output_name = j.at("compile").value("output_name", c.compile.output_name);
    }
    c.work_dir = j.value("work_dir", c.work_dir);
    if (j.contains("defense")) {
      const auto& d = j.at("defense");
      c.defense.filter = d.value("filter", c.defense.filter);
      c.defense.tau_sim = d.value("tau_sim", c.defense.tau_sim);
      c.defense.alpha_ppl = d.value("alpha_ppl", c.defense.alpha_ppl);
    }
    if (j.contains("simulation")) c.simulation = j.at("simulation");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, std::string("run config: ") + e.what());
  }
  if (c.providers != "mock" && c.providers != "remote") {
    throw Error(ErrorKind::kInvalidConfig, "providers must be 'mock' or 'remote'");
  }
  if (c.retries < 0) throw Error(ErrorKind::kInvalidConfig, "retries must be >= 0");
  if (!c.document_format.empty()) parse_document_format(c.document_format);
  validate_config(c.search);
  return c;
}

RunConfig load_run_config(const std::string& path) { return run_config_from_json(parse_json_file(path)); }

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json remote = c.remote;
  return {
      {"search", to_json(c.search)},
      {"conference", c.conference},
      {"conferences_dir", c.conferences_dir},
      {"template", std::string(prompts::to_string(c.template_id))},
      {"template_path", c.template_path},
      {"document_format", c.document_format},
      {"providers", c.providers},
      {"mock", c.mock},
      {"remote", remote},
      {"retries", c.retries},
      {"retry_backoff_ms", c.retry_backoff_ms},
      {"compile", {{"command", c.compile.command_template}, {"output_name", c.compile.output_name}}},
      {"work_dir", c.work_dir},
      {"defense",
       {{"filter", c.defense.filter}, {"tau_sim", c.defense.tau_sim}, {"alpha_ppl", c.defense.alpha_ppl}}},
      {"simulation", c.simulation},
  };
}

prompts::ConferenceConfig resolve_conference(const RunConfig& config) {
  if (!config.conferences_dir.empty()) {
    const auto extra = prompts::load_conferences(config.conferences_dir);
    try {
      return prompts::find_conference(config.conference, extra);
    } catch (const Error&) {
    }
  }
  return prompts::find_conference(config.conference);
}

prompts::ReviewerTemplate resolve_template(const RunConfig& config, prompts::TemplateId id) {
  if (!config.template_path.empty() && id == config.template_id) return prompts::load_template(id, config.template_path);
  return prompts::builtin_template(id);
}

DocumentFormat format_for(const RunConfig& config, const std::string& path) {
  if (!config.document_format.empty()) return parse_document_format(config.document_format);
  return fs::path(path).extension() == ".tex" ? DocumentFormat::kLatex : DocumentFormat::kPlain;
}

providers::ProviderSet make_providers(const RunConfig& config, const prompts::ConferenceConfig& conference,
                                      const std::string& reference_text) {
  providers::ProviderSet p;
  p.retry.retries = config.retries;
  p.retry.base_backoff = std::chrono::milliseconds(config.retry_backoff_ms);

  if (config.providers == "remote") {
    const auto& r = config.remote;
    try {
      const auto endpoint = [&](const char* name, const std::string& path) {
        try {
          return providers::endpoint_from_json(section(r, name), path);
        } catch (const Error& e) {
          const std::string what = e.what();
          throw Error(e.kind(), "remote." + std::string(name) + ": " + what.substr(to_string(e.kind()).size() + 2));
        }
      };
      const auto& gen = section(r, "generator");
      const auto& rev = section(r, "reviewer");
      p.generator = std::make_shared<providers::RemoteGenerator>(endpoint("generator", "/v1/generate"),
                                                                 chat_model_from_json(gen));
      p.reviewer = std::make_shared<providers::RemoteReviewer>(endpoint("reviewer", "/v1/generate"),
                                                               chat_model_from_json(rev));
      auto client = std::make_shared<providers::SidecarClient>(endpoint("sidecar", ""));
      p.similarity = std::make_shared<providers::SidecarSimilarity>(client);
      p.perplexity = std::make_shared<providers::SidecarPerplexity>(client);
      p.sentiment = std::make_shared<providers::SidecarSentiment>(client);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidConfig, std::string("remote providers: ") + e.what());
    }
    return p;
  }

  const sim::SuiteConfig defaults;
  const auto& m = config.mock;
  try {
    const auto& gen = section(m, "generator");
    auto options = defaults.generator;
    options.substitution_rate = gen.value("substitution_rate", options.substitution_rate);
    options.drift_rate = gen.value("drift_rate", options.drift_rate);
    options.garble_rate = gen.value("garble_rate", options.garble_rate);
    options.identity_first = gen.value("identity_first", options.identity_first);
    options.top_parent_rate = gen.value("top_parent_rate", options.top_parent_rate);
    options.crossover_rate = gen.value("crossover_rate", options.crossover_rate);
    options.revert_rate = gen.value("revert_rate", options.revert_rate);
    auto lexicon = gen.contains("lexicon")
                       ? providers::Lexicon(gen.at("lexicon").get<std::vector<std::vector<std::string>>>())
                       : sim::default_world().lexicon;
    p.generator = std::make_shared<providers::MockGenerator>(std::move(lexicon), options);

    const auto& rev = section(m, "reviewer");
    auto spec = sim::reviewer_spec(defaults);
    if (rev.contains("base_score")) spec.base_score = Rational::from_double(rev.at("base_score").get<double>());
    if (rev.contains("feature_weights")) spec.feature_weights = rev.at("feature_weights").get<std::map<std::string, double>>();
    spec.noise_sd = rev.value("noise_sd", spec.noise_sd);
    spec.seed = rev.value("seed", spec.seed);
    spec.context_coupling = rev.value("context_coupling", spec.context_coupling);
    spec.body_weight = rev.value("body_weight", spec.body_weight);
    p.reviewer = std::make_shared<providers::MockReviewer>(spec, conference.scale);

    const auto ref_path = m.value("perplexity_reference", std::string());
    p.perplexity = std::make_shared<providers::MockPerplexity>(ref_path.empty() ? reference_text : read_file(ref_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, std::string("mock providers: ") + e.what());
  }
  p.similarity = std::make_shared<providers::MockSimilarity>();
  p.sentiment = std::make_shared<providers::MockSentiment>();
  return p;
}

nlohmann::json to_json(const prompts::ReviewOutput& r) {
  return {{"score", r.score.to_double()},
          {"score_text", r.score.to_string()},
          {"template", std::string(prompts::to_string(r.template_id))},
          {"content", r.content},
          {"marker_occurrences", r.marker_occurrences},
          {"trailing_prose", r.trailing_prose}};
}

// ---------------------------------------------------------------------------
// entry point

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"paraprobe: paraphrasing-attack robustness harness for score-emitting LLM reviewers"};
  app.name("paraprobe");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "Run configuration (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every stochastic choice");
  app.add_option("--providers", g.providers, "Provider kind")->check(CLI::IsMember({"mock", "remote"}));
  app.add_option("--out", g.out_dir, "Output directory");

  AttackArgs attack;
  auto* attack_cmd = app.add_subcommand("attack", "Search for a score-raising paraphrase of the abstract");
  attack_cmd->add_option("document", attack.doc_path, "LaTeX or plain-text paper")->required();
  attack_cmd->add_flag("--dry-run", attack.dry_run, "Print the resolved config and budget, call no provider");
  attack_cmd->add_flag("--i-own-this-target", attack.own_target, "Acknowledge that the remote reviewer is yours");
  attack_cmd->add_flag("--baseline", attack.baseline, "Also run the paraphrase baseline at equal budget");
  attack_cmd->add_option("--conference", attack.conference, "Venue id or name");
  attack_cmd->add_option("--template", attack.template_name, "delimiters, markdown or numbered");
  attack_cmd->add_option("-K,--candidates", attack.k, "Candidates per iteration");
  attack_cmd->add_option("-N,--samples", attack.n, "Review samples per candidate");
  attack_cmd->add_option("-T,--iterations", attack.t, "Refinement iterations");

  ReviewArgs review;
  auto* review_cmd = app.add_subcommand("review", "Review a paper once and print the parsed review");
  review_cmd->add_option("document", review.doc_path, "LaTeX or plain-text paper")->required();
  review_cmd->add_option("--conference", review.conference, "Venue id or name");
  review_cmd->add_option("--template", review.template_name, "delimiters, markdown or numbered");
  review_cmd->add_flag("--all-templates", review.all_templates, "One review per template, plus their mean");
  review_cmd->add_option("--samples", review.samples, "Reviews per template");

  DefendArgs defend;
  auto* defend_cmd = app.add_subcommand("defend", "Paraphrase the abstract or random paragraphs before review");
  defend_cmd->add_option("document", defend.doc_path, "LaTeX or plain-text paper")->required();
  defend_cmd->add_option("--method", defend.method, "abst or random")->check(CLI::IsMember({"abst", "random"}));
  defend_cmd->add_option("-n,--paragraphs", defend.n, "Paragraphs to paraphrase with --method random");
  defend_cmd->add_flag("--filter", defend.filter, "Keep text whose paraphrase fails the similarity/perplexity check");
  defend_cmd->add_flag("--score", defend.score, "Review input and output and report the change rate");
  defend_cmd->add_option("--conference", defend.conference, "Venue id or name");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Tables over run records");
  analyze_cmd->add_option("records", analyze.records_path, "Records JSON (review pairs for divergence)")->required();
  analyze_cmd->add_option("--report", analyze.report, "Report kind")
      ->required()
      ->check(CLI::IsMember({"selfpref", "transfer", "gap", "divergence", "defense"}));

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Offline suite against mock providers");
  simulate_cmd->add_option("--documents", simulate.documents, "Synthetic documents");
  simulate_cmd->add_option("--seeds", simulate.seeds, "Seeds per document");
  simulate_cmd->add_option("--suite-config", simulate.suite_config, "Suite parameters (JSON)");
  simulate_cmd->add_flag("--strict", simulate.strict, "Exit non-zero when any check fails");
  simulate_cmd->add_flag("--quiet", simulate.quiet, "No progress lines");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*attack_cmd) return cmd_attack(g, attack, out, err);
    if (*review_cmd) return cmd_review(g, review, out, err);
    if (*defend_cmd) return cmd_defend(g, defend, out, err);
    if (*analyze_cmd) return cmd_analyze(g, analyze, out, err);
    if (*simulate_cmd) return cmd_simulate(g, simulate, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace paraprobe::cli
