#include "paraprobe/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"
#include "paraprobe/prompts/conference.hpp"

namespace paraprobe::analysis {

double minmax_normalize(double score, const ScoreScale& scale) {
  const double lo = scale.min().to_double();
  const double hi = scale.max().to_double();
  if (!(score >= lo && score <= hi)) {
    throw Error(ErrorKind::kOutOfRange, "score " + format_score(score) + " outside [" + scale.min().to_string() +
                                            ", " + scale.max().to_string() + "]");
  }
  return (score - lo) / (hi - lo);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, int exact_max_n) {
  std::vector<double> nonzero;
  for (const double d : diffs) {
    if (!std::isfinite(d)) throw Error(ErrorKind::kInvalidArgument, "non-finite difference");
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) throw Error(ErrorKind::kAllZeroDiffs, "all differences are zero; the test is undefined");

  std::vector<double> magnitudes;
  for (const double d : nonzero) magnitudes.push_back(std::fabs(d));
  const auto ranks = average_ranks(magnitudes);

  WilcoxonResult r;
  r.n = static_cast<int>(nonzero.size());
  for (std::size_t i = 0; i < nonzero.size(); ++i) (nonzero[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];

  if (r.n <= exact_max_n) {
    // Doubled average ranks are integers; count sign assignments per sum.
    std::vector<int> doubled;
    int total = 0;
    for (const double rk : ranks) {
      doubled.push_back(static_cast<int>(std::lround(2.0 * rk)));
      total += doubled.back();
    }
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    int reach = 0;
    for (const int d : doubled) {
      for (int s = reach; s >= 0; --s) {
        if (ways[static_cast<std::size_t>(s)] != 0.0) ways[static_cast<std::size_t>(s + d)] += ways[static_cast<std::size_t>(s)];
      }
      reach += d;
    }
    const int observed = static_cast<int>(std::lround(2.0 * r.w_plus));
    const double all = std::ldexp(1.0, r.n);
    double lower = 0.0;
    double upper = 0.0;
    for (int s = 0; s <= total; ++s) {
      if (s <= observed) lower += ways[static_cast<std::size_t>(s)];
      if (s >= observed) upper += ways[static_cast<std::size_t>(s)];
    }
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    r.exact = true;
    return r;
  }

  const double n = r.n;
  const double mean = n * (n + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    auto sorted = magnitudes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  const double dev = std::max(0.0, std::fabs(r.w_plus - mean) - 0.5);
  const double z = var > 0.0 ? dev / std::sqrt(var) : 0.0;
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::kInvalidArgument, "spearman needs equal-length inputs");
  if (x.size() < 3) throw Error(ErrorKind::kDegenerate, "spearman needs at least 3 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto n = rx.size();
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
    sxy += (rx[i] - mx) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::kDegenerate, "spearman of a constant input");

  SpearmanResult r;
  r.n = static_cast<int>(n);
  r.rho = sxy / std::sqrt(sxx * syy);
  if (n <= 10) {
    // Under the null every pairing of y ranks with x ranks is equally likely.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const double observed = std::fabs(sxy);
    std::uint64_t extreme = 0;
    std::uint64_t total = 0;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (rx[i] - mx) * (ry[perm[i]] - my);
      if (std::fabs(s) >= observed - 1e-9) ++extreme;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    r.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    r.exact = true;
    return r;
  }
  const double df = static_cast<double>(n) - 2.0;
  if (std::fabs(r.rho) >= 1.0) {
    r.p_value = 0.0;
    return r;
  }
  const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
  const boost::math::students_t dist(df);
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
  return r;
}

double auc(const std::vector<double>& positives, const std::vector<double>& negatives) {
  if (positives.empty() || negatives.empty()) throw Error(ErrorKind::kDegenerate, "AUC needs both classes");
  double wins = 0.0;
  for (const double p : positives) {
    for (const double q : negatives) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  }
  return wins / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

LinearFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::kDegenerate, "OLS needs two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::kDegenerate, "OLS with constant x");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

// ---------------------------------------------------------------------------

bool is_known_condition(const std::string& c) {
  if (c == "original" || c == "paraphrase" || c == "paa" || c == "defended-abst" || c == "actual") return true;
  const std::string prefix = "defended-random(";
  if (c.rfind(prefix, 0) != 0 || c.back() != ')') return false;
  const auto digits = c.substr(prefix.size(), c.size() - prefix.size() - 1);
  return !digits.empty() && std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

nlohmann::json to_json(const RunRecord& r) {
  return {
      {"paper_id", r.paper_id},           {"conference", r.conference}, {"attacker", r.attacker_id},
      {"optimizer", r.optimizer_reviewer_id}, {"evaluator", r.evaluator_reviewer_id}, {"condition", r.condition},
      {"score", r.mean_score},
  };
}

std::vector<RunRecord> records_from_json(const nlohmann::json& j) {
  const nlohmann::json* arr = &j;
  if (j.is_object()) {
    if (!j.contains("records")) throw Error(ErrorKind::kMalformedRecords, "object without a 'records' array");
    arr = &j["records"];
  }
  if (!arr->is_array()) throw Error(ErrorKind::kMalformedRecords, "records must be a JSON array");
  if (arr->empty()) throw Error(ErrorKind::kMalformedRecords, "no records");

  std::vector<RunRecord> out;
  std::size_t i = 0;
  for (const auto& item : *arr) {
    const auto where = "record " + std::to_string(i++);
    try {
      RunRecord r;
      r.paper_id = item.at("paper_id").get<std::string>();
      r.conference = item.value("conference", std::string());
      r.attacker_id = item.value("attacker", std::string());
      r.optimizer_reviewer_id = item.value("optimizer", std::string());
      r.evaluator_reviewer_id = item.value("evaluator", std::string());
      r.condition = item.at("condition").get<std::string>();
      r.mean_score = item.at("score").get<double>();
      if (!is_known_condition(r.condition)) {
        throw Error(ErrorKind::kMalformedRecords, where + ": unknown condition '" + r.condition + "'");
      }
      if (!std::isfinite(r.mean_score)) throw Error(ErrorKind::kMalformedRecords, where + ": non-finite score");
      if (!r.conference.empty()) {
        for (const auto& conf : prompts::builtin_conferences()) {
          if (to_lower(conf.id) != to_lower(r.conference) && to_lower(conf.name) != to_lower(r.conference)) continue;
          if (r.mean_score < conf.scale.min().to_double() || r.mean_score > conf.scale.max().to_double()) {
            throw Error(ErrorKind::kMalformedRecords, where + ": score outside the " + conf.name + " scale");
          }
        }
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kMalformedRecords, where + ": " + e.what());
    }
  }
  return out;
}

std::vector<RunRecord> load_records(const std::string& path) {
  const auto text = read_file(path);
  try {
    return records_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kMalformedRecords, path + ": " + e.what());
  }
}

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

std::string gap_key(const RunRecord& r) {
  if (r.condition == "paa") return "paa:" + (r.attacker_id.empty() ? r.optimizer_reviewer_id : r.attacker_id);
  return r.condition;
}

}  // namespace

std::vector<SelfPreferenceRow> self_preference_table(const std::vector<RunRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> originals;  // (paper, evaluator)
  for (const auto& r : records) {
    if (r.condition == "original") originals[{r.paper_id, r.evaluator_reviewer_id}].push_back(r.mean_score);
  }
  // attacker -> evaluator -> deltas
  std::map<std::string, std::map<std::string, std::vector<double>>> deltas;
  for (const auto& r : records) {
    if (r.condition != "paa") continue;
    const auto it = originals.find({r.paper_id, r.evaluator_reviewer_id});
    if (it == originals.end()) {
      throw Error(ErrorKind::kMissingBaseline, "no original score for paper '" + r.paper_id + "' under evaluator '" +
                                                   r.evaluator_reviewer_id + "'");
    }
    deltas[r.attacker_id][r.evaluator_reviewer_id].push_back(r.mean_score - mean(it->second));
  }
  if (deltas.empty()) throw Error(ErrorKind::kMalformedRecords, "no paa records");

  std::vector<SelfPreferenceRow> rows;
  for (const auto& [attacker, by_eval] : deltas) {
    SelfPreferenceRow row;
    row.attacker = attacker;
    const auto self = by_eval.find(attacker);
    if (self == by_eval.end()) {
      throw Error(ErrorKind::kMissingBaseline, "attacker '" + attacker + "' has no matched evaluation");
    }
    row.matched_delta = mean(self->second);
    row.matched_pairs = static_cast<int>(self->second.size());
    std::vector<double> others;
    for (const auto& [evaluator, d] : by_eval) {
      if (evaluator != attacker) others.push_back(mean(d));
    }
    row.mismatched_evaluators = static_cast<int>(others.size());
    if (!others.empty()) row.mismatched_delta = mean(others);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> TransferMatrix::cell(const std::string& optimizer, const std::string& evaluator) const {
  const auto it = cells.find({optimizer, evaluator});
  if (it == cells.end()) return std::nullopt;
  return it->second;
}

std::optional<double> TransferMatrix::off_diagonal_mean(const std::string& optimizer) const {
  std::vector<double> v;
  for (const auto& e : evaluators) {
    if (e == optimizer) continue;
    if (const auto c = cell(optimizer, e)) v.push_back(*c);
  }
  if (v.empty()) return std::nullopt;
  return mean(v);
}

TransferMatrix transfer_matrix(const std::vector<RunRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> acc;
  std::map<std::string, std::vector<double>> orig;
  std::set<std::string> optimizers;
  std::set<std::string> evaluators;
  for (const auto& r : records) {
    if (r.condition == "paa") {
      acc[{r.optimizer_reviewer_id, r.evaluator_reviewer_id}].push_back(r.mean_score);
      optimizers.insert(r.optimizer_reviewer_id);
      evaluators.insert(r.evaluator_reviewer_id);
    } else if (r.condition == "original") {
      orig[r.evaluator_reviewer_id].push_back(r.mean_score);
    }
  }
  if (evaluators.empty()) throw Error(ErrorKind::kMalformedRecords, "no paa records with an evaluator");
  TransferMatrix m;
  m.optimizers.assign(optimizers.begin(), optimizers.end());
  m.evaluators.assign(evaluators.begin(), evaluators.end());
  for (const auto& [key, v] : acc) m.cells[key] = mean(v);
  for (const auto& [e, v] : orig) m.original[e] = mean(v);
  for (const auto& o : m.optimizers) {
    for (const auto& e : m.evaluators) {
      if (!m.cells.count({o, e})) m.missing.emplace_back(o, e);
    }
  }
  return m;
}

GapReport actual_review_gap(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<double>> actual;
  for (const auto& r : records) {
    if (r.condition == "actual") actual[r.paper_id].push_back(r.mean_score);
  }
  GapReport report;
  if (actual.empty()) throw Error(ErrorKind::kMissingBaseline, "no 'actual' review scores");

  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, std::vector<double>>> diffs;  // key -> paper -> diffs
  for (const auto& r : records) {
    if (r.condition == "actual") continue;
    const auto it = actual.find(r.paper_id);
    if (it == actual.end()) {
      report.warnings.push_back("dropped unpaired " + r.condition + " record for paper '" + r.paper_id + "'");
      continue;
    }
    const auto key = gap_key(r);
    if (!diffs.count(key)) order.push_back(key);
    diffs[key][r.paper_id].push_back(r.mean_score - mean(it->second));
  }
  // original and paraphrase first, then attackers in first-seen order
  std::stable_sort(order.begin(), order.end(), [](const std::string& a, const std::string& b) {
    const auto rank = [](const std::string& k) { return k == "original" ? 0 : (k == "paraphrase" ? 1 : 2); };
    return rank(a) < rank(b);
  });

  const auto per_paper = [&](const std::string& key) {
    std::map<std::string, double> m;
    const auto it = diffs.find(key);
    if (it == diffs.end()) return m;
    for (const auto& [paper, d] : it->second) m[paper] = mean(d);
    return m;
  };
  const auto paired_p = [](const std::map<std::string, double>& a,
                           const std::map<std::string, double>& b) -> std::optional<double> {
    std::vector<double> d;
    for (const auto& [paper, v] : a) {
      const auto it = b.find(paper);
      if (it != b.end()) d.push_back(v - it->second);
    }
    if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) return std::nullopt;
    return wilcoxon_signed_rank(d).p_value;
  };

  const auto orig = per_paper("original");
  const auto para = per_paper("paraphrase");
  for (const auto& key : order) {
    const auto cur = per_paper(key);
    GapRow row;
    row.condition = key;
    std::vector<double> values;
    for (const auto& [paper, v] : cur) values.push_back(v);
    row.pairs = static_cast<int>(values.size());
    row.mean_difference = mean(values);
    if (!std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0; })) {
      row.p_vs_actual = wilcoxon_signed_rank(values).p_value;
    }
    if (key != "original" && !orig.empty()) row.p_vs_original = paired_p(cur, orig);
    if (key != "paraphrase" && key != "original" && !para.empty()) row.p_vs_paraphrase = paired_p(cur, para);
    report.rows.push_back(std::move(row));
  }
  return report;
}

ReviewDivergence review_divergence(const ReviewPair& pair, const providers::ProviderSet& providers) {
  const auto& a = pair.original_review.content;
  const auto& b = pair.attacked_review.content;
  if (a.empty() || b.empty()) throw Error(ErrorKind::kDegenerate, "review content is empty");
  if (!providers.similarity || !providers.perplexity || !providers.sentiment) {
    throw Error(ErrorKind::kInvalidConfig, "review divergence needs similarity, perplexity and sentiment scorers");
  }
  ReviewDivergence d;
  const double s0 = providers.sentiment->sentiment(a);
  if (s0 > 0.0) d.sentiment_ratio = providers.sentiment->sentiment(b) / s0;
  d.semantic_similarity = providers.similarity->similarity(a, b);
  d.ppl_ratio = a == b ? 1.0 : providers.perplexity->perplexity(b) / providers.perplexity->perplexity(a);
  return d;
}

// ---------------------------------------------------------------------------

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s(buf);
  if (s.rfind("-0.", 0) == 0 && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  const auto measure = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) width[i] = std::max(width[i], row[i].size());
  };
  measure(header);
  for (const auto& r : rows) measure(r);
  const auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string cell = i < row.size() ? row[i] : "";
      if (i == 0) {
        out += cell + std::string(width[i] - cell.size(), ' ');
      } else {
        out += "  " + std::string(width[i] - cell.size(), ' ') + cell;
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (const auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

nlohmann::json to_json(const std::vector<SelfPreferenceRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"attacker", r.attacker},
                   {"matched_delta", r.matched_delta},
                   {"mismatched_delta", r.mismatched_delta ? nlohmann::json(*r.mismatched_delta) : nlohmann::json()},
                   {"matched_pairs", r.matched_pairs},
                   {"mismatched_evaluators", r.mismatched_evaluators}});
  }
  return arr;
}

nlohmann::json to_json(const TransferMatrix& m) {
  nlohmann::json cells = nlohmann::json::object();
  for (const auto& o : m.optimizers) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& e : m.evaluators) {
      const auto c = m.cell(o, e);
      row[e] = c ? nlohmann::json(*c) : nlohmann::json();
    }
    cells[o] = std::move(row);
  }
  auto missing = nlohmann::json::array();
  for (const auto& [o, e] : m.missing) missing.push_back({{"optimizer", o}, {"evaluator", e}});
  return {{"optimizers", m.optimizers}, {"evaluators", m.evaluators}, {"cells", cells},
          {"original", m.original},     {"missing", missing}};
}

nlohmann::json to_json(const GapReport& report) {
  auto rows = nlohmann::json::array();
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  for (const auto& r : report.rows) {
    rows.push_back({{"condition", r.condition},
                    {"mean_difference", r.mean_difference},
                    {"pairs", r.pairs},
                    {"p_vs_actual", opt(r.p_vs_actual)},
                    {"p_vs_original", opt(r.p_vs_original)},
                    {"p_vs_paraphrase", opt(r.p_vs_paraphrase)}});
  }
  return {{"rows", rows}, {"warnings", report.warnings}};
}

}  // namespace paraprobe::analysis
