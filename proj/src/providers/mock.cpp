#include "paraprobe/providers/mock.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"
#include "paraprobe/document/document.hpp"

namespace paraprobe::providers {

namespace {

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Different member of `group` than `current` (uniform), or `current` when the
/// group has a single member.
std::string other_member(std::mt19937_64& rng, const std::vector<std::string>& group, const std::string& current) {
  if (group.size() < 2) return current;
  std::vector<const std::string*> options;
  for (const auto& m : group) {
    if (m != current) options.push_back(&m);
  }
  return *options[uniform_index(rng, options.size())];
}

bool aligned(const SiteText& candidate, const SiteText& original) {
  if (candidate.segments.size() != original.segments.size() || candidate.sites != original.sites) return false;
  std::size_t next_site = 0;
  for (std::size_t i = 0; i < original.segments.size(); ++i) {
    if (next_site < original.sites.size() && original.sites[next_site] == i) {
      if (candidate.site_groups[next_site] != original.site_groups[next_site]) return false;
      ++next_site;
      continue;
    }
    if (candidate.segments[i] != original.segments[i]) return false;
  }
  return true;
}

struct Token {
  std::string word;
  std::size_t pos;
};

std::vector<Token> positioned_tokens(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    std::string word;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
      ++i;
    }
    if (!word.empty()) out.push_back({std::move(word), start});
  }
  return out;
}

std::optional<ByteRange> find_abstract(std::string_view document) {
  try {
    if (document.find("\\begin{abstract}") != std::string_view::npos) {
      return doc::locate_abstract(document, DocumentFormat::kLatex);
    }
    if (document.find(doc::PlainMarkers{}.begin) != std::string_view::npos) {
      return doc::locate_abstract(document, DocumentFormat::kPlain);
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

/// Byte ranges of blank-line separated blocks.
std::vector<ByteRange> blocks_of(std::string_view text) {
  std::vector<ByteRange> out;
  std::size_t start = 0;
  bool in_block = false;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    auto nl = text.find('\n', line_start);
    if (nl == std::string_view::npos) nl = text.size();
    const bool blank = trim(text.substr(line_start, nl - line_start)).empty();
    if (!blank && !in_block) {
      start = line_start;
      in_block = true;
    } else if (blank && in_block) {
      out.push_back({start, line_start});
      in_block = false;
    }
    if (nl == text.size()) break;
    line_start = nl + 1;
  }
  if (in_block) out.push_back({start, text.size()});
  return out;
}

const std::vector<std::string>& positive_bank() {
  static const std::vector<std::string> v{
      "The contribution is clear and well motivated.",
      "The experiments are convincing and thorough.",
      "The writing is excellent and easy to follow.",
      "The results are strong and significant.",
      "The approach is elegant and promising.",
  };
  return v;
}

const std::vector<std::string>& negative_bank() {
  static const std::vector<std::string> v{
      "The evaluation is limited and somewhat unconvincing.",
      "Some claims are unclear or insufficiently supported.",
      "The novelty appears incremental.",
      "Important baselines are missing.",
      "The analysis of failure cases is weak.",
  };
  return v;
}

const std::vector<std::string>& neutral_bank() {
  static const std::vector<std::string> v{
      "No further comments.",
      "The presentation could be tightened in places.",
      "Additional details on the setup would help.",
      "I have read the paper carefully.",
      "Minor typos should be fixed.",
  };
  return v;
}

std::string pick_sentences(std::mt19937_64& rng, const std::vector<std::string>& bank, std::size_t count) {
  std::vector<std::size_t> order(bank.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  count = std::min(count, bank.size());
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!out.empty()) out += ' ';
    out += bank[order[i]];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lexicon / SiteText

Lexicon::Lexicon(std::vector<std::vector<std::string>> groups) : groups_(std::move(groups)) {
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (auto& m : groups_[g]) {
      m = to_lower(m);
      if (!index_.emplace(m, g).second) {
        throw Error(ErrorKind::kInvalidConfig, "word '" + m + "' appears in two synonym groups");
      }
    }
  }
}

std::optional<std::size_t> Lexicon::group_of(std::string_view word) const {
  const auto it = index_.find(to_lower(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SiteText SiteText::parse(std::string_view text, const Lexicon& lexicon) {
  SiteText st;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool word = std::isalpha(static_cast<unsigned char>(text[i])) != 0;
    std::size_t j = i;
    while (j < text.size() && (std::isalpha(static_cast<unsigned char>(text[j])) != 0) == word) ++j;
    st.segments.emplace_back(text.substr(i, j - i));
    st.is_word.push_back(word);
    if (word) {
      if (const auto g = lexicon.group_of(st.segments.back())) {
        st.sites.push_back(st.segments.size() - 1);
        st.site_groups.push_back(*g);
      }
    }
    i = j;
  }
  return st;
}

std::string SiteText::join() const {
  std::string out;
  for (const auto& s : segments) out += s;
  return out;
}

void SiteText::set_site(std::size_t s, const std::string& word) {
  auto& seg = segments.at(sites.at(s));
  std::string replacement = word;
  if (!seg.empty() && std::isupper(static_cast<unsigned char>(seg[0])) && !replacement.empty()) {
    replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  seg = std::move(replacement);
}

std::string SiteText::site_word(std::size_t s) const { return to_lower(segments.at(sites.at(s))); }

// ---------------------------------------------------------------------------
// MockGenerator

MockGenerator::MockGenerator(Lexicon lexicon, Options options)
    : lexicon_(std::move(lexicon)), options_(options) {}

std::string MockGenerator::zero_shot(const SiteText& original, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  SiteText out = original;
  for (std::size_t s = 0; s < out.sites.size(); ++s) {
    if (uniform01(rng) < options_.substitution_rate) {
      out.set_site(s, other_member(rng, lexicon_.members(out.site_groups[s]), out.site_word(s)));
    }
  }
  return out.join();
}

std::string MockGenerator::refine(const SiteText& original, const std::vector<std::pair<SiteText, double>>& parents,
                                  std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const std::size_t top = std::min<std::size_t>(3, parents.size());
  const std::size_t first = uniform01(rng) < options_.top_parent_rate ? 0 : uniform_index(rng, top);
  SiteText child = parents[first].first;
  if (top >= 2 && uniform01(rng) < options_.crossover_rate) {
    std::size_t second = uniform_index(rng, top - 1);
    if (second >= first) ++second;
    for (std::size_t s = 0; s < child.sites.size(); ++s) {
      if (uniform01(rng) < 0.5) child.set_site(s, parents[second].first.site_word(s));
    }
  }
  if (child.sites.empty()) return child.join();

  const double u = uniform01(rng);
  std::size_t mutations = u < 0.6 ? 1 : (u < 0.9 ? 2 : 3);
  mutations = std::min(mutations, child.sites.size());
  std::vector<std::size_t> order(child.sites.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t m = 0; m < mutations; ++m) {
    const auto s = order[m];
    if (uniform01(rng) < options_.revert_rate) {
      child.set_site(s, original.site_word(s));
    } else {
      child.set_site(s, other_member(rng, lexicon_.members(child.site_groups[s]), child.site_word(s)));
    }
  }
  return child.join();
}

std::vector<std::string> MockGenerator::generate(std::string_view prompt, int count, std::uint64_t seed) const {
  if (count < 1) throw Error(ErrorKind::kInvalidArgument, "generate needs count >= 1");
  prompts::ParsedParaphrasePrompt parsed;
  try {
    parsed = prompts::parse_paraphrase_prompt(prompt);
  } catch (const Error&) {
    parsed.original = std::string(prompt);
  }
  const SiteText original = SiteText::parse(parsed.original, lexicon_);

  std::vector<std::pair<SiteText, double>> parents;
  for (const auto& ex : parsed.examples) {
    auto st = SiteText::parse(ex.text, lexicon_);
    if (aligned(st, original)) parents.emplace_back(std::move(st), ex.score);
  }
  std::stable_sort(parents.begin(), parents.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  const auto prompt_hash = fnv1a64(prompt);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto s = derive_seed(seed, {prompt_hash, static_cast<std::uint64_t>(i)});
    if (options_.identity_first && i == 0) {
      out.push_back(parsed.original);
      continue;
    }
    std::mt19937_64 rng(mix64(s));
    const double u = uniform01(rng);
    if (u < options_.drift_rate) {
      std::vector<std::string> kept;
      for (std::size_t k = 0; k < original.segments.size(); ++k) {
        if (original.is_word[k] && uniform01(rng) >= 0.4) kept.push_back(original.segments[k]);
      }
      if (kept.empty()) kept.push_back("text");
      std::string text;
      for (const auto& w : kept) text += (text.empty() ? "" : " ") + w;
      out.push_back(std::move(text));
    } else if (u < options_.drift_rate + options_.garble_rate) {
      SiteText g = original;
      for (std::size_t k = 0; k < g.segments.size(); ++k) {
        auto& w = g.segments[k];
        if (!g.is_word[k] || w.size() < 4 || uniform01(rng) >= 0.6) continue;
        std::reverse(w.begin() + 1, w.end() - 1);
        std::shuffle(w.begin() + 1, w.end() - 1, rng);
      }
      out.push_back(g.join());
    } else if (parents.empty()) {
      out.push_back(zero_shot(original, s));
    } else {
      out.push_back(refine(original, parents, s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// MockReviewer

MockReviewer::MockReviewer(MockReviewerSpec spec, ScoreScale scale) : spec_(std::move(spec)), scale_(std::move(scale)) {
  if (spec_.noise_sd < 0.0) throw Error(ErrorKind::kInvalidConfig, "noise_sd must be non-negative");
  if (!(spec_.context_coupling >= 0.0 && spec_.context_coupling < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "context_coupling must lie in [0, 1)");
  }
  for (const auto& [word, w] : spec_.feature_weights) {
    if (w != 0.0) weights_[to_lower(word)] = w;
  }
}

double MockReviewer::compute_pre_noise(std::string_view document) const {
  const auto abstract = find_abstract(document);
  const auto tokens = positioned_tokens(document);

  // Fingerprints of the blocks outside the abstract, with positively weighted
  // words removed. Edits confined to the abstract never move the context.
  std::vector<std::uint64_t> fingerprints;
  if (spec_.context_coupling > 0.0) {
    auto blocks = blocks_of(document);
    if (abstract) {
      std::vector<ByteRange> outside;
      for (const auto& b : blocks) {
        if (!b.overlaps(*abstract)) outside.push_back(b);
      }
      if (!outside.empty()) blocks = std::move(outside);
    }
    fingerprints.assign(blocks.size(), 0xcbf29ce484222325ULL);
    std::size_t b = 0;
    for (const auto& tok : tokens) {
      while (b < blocks.size() && tok.pos >= blocks[b].end) ++b;
      if (b == blocks.size()) break;
      if (tok.pos < blocks[b].begin) continue;
      const auto it = weights_.find(tok.word);
      if (it != weights_.end() && it->second > 0.0) continue;
      fingerprints[b] = fnv1a64(tok.word, fingerprints[b] ^ 0x20);
    }
  }
  std::unordered_map<std::string, double> context;
  const auto ctx = [&](const std::string& word) {
    if (fingerprints.empty()) return 0.0;
    const auto it = context.find(word);
    if (it != context.end()) return it->second;
    const auto wh = fnv1a64(word) ^ mix64(spec_.seed);
    double sum = 0.0;
    for (const auto fp : fingerprints) {
      const auto h = mix64(wh ^ fp);
      sum += 2.0 * (static_cast<double>(h >> 11) / 9007199254740992.0) - 1.0;
    }
    const double v = std::clamp(sum / std::sqrt(static_cast<double>(fingerprints.size())), -1.0, 1.0);
    context.emplace(word, v);
    return v;
  };

  double score = spec_.base_score.to_double();
  for (const auto& tok : tokens) {
    const auto it = weights_.find(tok.word);
    if (it == weights_.end()) continue;
    const bool in_abstract = !abstract || (tok.pos >= abstract->begin && tok.pos < abstract->end);
    const double region = in_abstract ? 1.0 : spec_.body_weight;
    score += it->second * region * (1.0 + spec_.context_coupling * ctx(tok.word));
  }
  return score;
}

double MockReviewer::pre_noise_score(std::string_view document) const {
  const auto key = fnv1a64(document);
  {
    std::lock_guard lock(cache_mu_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double value = compute_pre_noise(document);
  std::lock_guard lock(cache_mu_);
  if (cache_.size() > 200'000) cache_.clear();
  cache_.emplace(key, value);
  return value;
}

Rational MockReviewer::sample_score(std::string_view document, std::uint64_t seed) const {
  double value = pre_noise_score(document);
  if (spec_.noise_sd > 0.0) {
    std::mt19937_64 rng(derive_seed(spec_.seed, {seed, 0x6e6f697365ULL}));
    value += std::normal_distribution<double>(0.0, spec_.noise_sd)(rng);
  }
  return scale_.nearest(value);
}

std::string MockReviewer::complete(const ReviewRequest& request) const {
  std::string attachment;
  std::string_view document = request.document_text;
  if (request.attachment_path) {
    attachment = read_file(*request.attachment_path);
    document = attachment;
  }
  if (document.empty()) throw Error(ErrorKind::kInvalidArgument, "mock reviewer received an empty document");

  const auto id = prompts::detect_template(request.reviewer_prompt);
  auto criteria = prompts::criteria_from_prompt(request.reviewer_prompt, id);
  if (criteria.empty()) criteria.emplace_back("Review");

  const auto score = sample_score(document, request.seed);
  const double span = (scale_.max() - scale_.min()).to_double();
  const double norm = (score - scale_.min()).to_double() / span;

  std::mt19937_64 rng(derive_seed(spec_.seed, {request.seed, 0x636f6e74656e74ULL}));
  const auto abstract = find_abstract(document);
  const std::string_view abstract_text = abstract ? abstract->slice(document) : document.substr(0, 400);
  std::string excerpt;
  {
    const auto words = word_tokens(abstract_text);
    for (std::size_t i = 0; i < words.size() && i < 14; ++i) excerpt += (i ? " " : "") + words[i];
  }
  std::vector<std::pair<double, std::string>> salient;
  for (const auto& w : word_tokens(abstract_text)) {
    const auto it = weights_.find(w);
    if (it != weights_.end() && it->second > 0.0) salient.emplace_back(-it->second, w);
  }
  std::sort(salient.begin(), salient.end());
  salient.erase(std::unique(salient.begin(), salient.end()), salient.end());
  std::string emphasis;
  for (std::size_t i = 0; i < salient.size() && i < 4; ++i) emphasis += (i ? ", " : "") + salient[i].second;

  static const std::vector<std::string> verbs{"proposes", "studies", "presents", "introduces"};
  const auto n_pos = static_cast<std::size_t>(1 + std::lround(norm * 3.0));
  const auto n_neg = static_cast<std::size_t>(1 + std::lround((1.0 - norm) * 3.0));

  std::vector<std::pair<std::string, std::string>> sections;
  for (const auto& name : criteria) {
    const auto lower = to_lower(name);
    const bool strength = lower.find("strength") != std::string::npos;
    const bool weakness = lower.find("weakness") != std::string::npos;
    std::string body;
    if (lower.find("summary") != std::string::npos && !strength && !weakness) {
      body = "The paper " + verbs[uniform_index(rng, verbs.size())] + " the following: " + excerpt + ".";
    } else if (strength || weakness) {
      if (strength) {
        body = pick_sentences(rng, positive_bank(), n_pos);
        if (!emphasis.empty()) body += " The abstract emphasizes " + emphasis + ".";
      }
      if (weakness) body += (body.empty() ? "" : " ") + pick_sentences(rng, negative_bank(), n_neg);
    } else {
      body = pick_sentences(rng, neutral_bank(), 1);
    }
    sections.emplace_back(name, std::move(body));
  }
  return prompts::render_review(prompts::builtin_template(id), sections, score);
}

// ---------------------------------------------------------------------------
// Similarity / perplexity / sentiment

double MockSimilarity::similarity(std::string_view a, std::string_view b) const {
  if (a == b) return 1.0;
  auto ta = word_tokens(a);
  auto tb = word_tokens(b);
  if (ta.empty() || tb.empty()) return 0.0;
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  std::size_t overlap = 0;
  for (std::size_t i = 0, j = 0; i < ta.size() && j < tb.size();) {
    if (ta[i] == tb[j]) {
      ++overlap;
      ++i;
      ++j;
    } else if (ta[i] < tb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(ta.size() + tb.size());
}

namespace {
constexpr unsigned char kStart = 0x02;
constexpr double kAlphabet = 256.0;
}  // namespace

MockPerplexity::MockPerplexity(std::string_view training_text) : bigrams_(65536, 0) {
  unsigned char a = kStart;
  unsigned char b = kStart;
  for (const char ch : training_text) {
    const auto c = static_cast<unsigned char>(ch);
    ++bigrams_[(static_cast<std::uint32_t>(a) << 8) | b];
    ++trigrams_[(static_cast<std::uint32_t>(a) << 16) | (static_cast<std::uint32_t>(b) << 8) | c];
    a = b;
    b = c;
  }
}

double MockPerplexity::perplexity(std::string_view text) const {
  if (text.empty()) throw Error(ErrorKind::kInvalidArgument, "perplexity of empty text");
  unsigned char a = kStart;
  unsigned char b = kStart;
  double log_sum = 0.0;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const std::uint32_t ctx = (static_cast<std::uint32_t>(a) << 8) | b;
    const auto it = trigrams_.find((ctx << 8) | c);
    const double tri = it == trigrams_.end() ? 0.0 : it->second;
    log_sum += std::log((tri + 1.0) / (bigrams_[ctx] + kAlphabet));
    a = b;
    b = c;
  }
  return std::exp(-log_sum / static_cast<double>(text.size()));
}

MockSentiment::MockSentiment()
    : MockSentiment({"excellent", "strong", "clear", "convincing", "significant", "elegant", "promising", "thorough",
                     "novel", "rigorous", "solid", "impressive", "good", "great", "compelling", "robust", "valuable",
                     "insightful", "interesting", "well"},
                    {"weak", "limited", "unclear", "unconvincing", "incremental", "missing", "insufficiently", "flawed",
                     "poor", "lacking", "confusing", "problematic", "narrow", "bad", "deeply"}) {}

MockSentiment::MockSentiment(std::vector<std::string> positive, std::vector<std::string> negative) {
  for (auto& w : positive) positive_.insert(to_lower(w));
  for (auto& w : negative) negative_.insert(to_lower(w));
}

double MockSentiment::sentiment(std::string_view text) const {
  if (text.empty()) throw Error(ErrorKind::kInvalidArgument, "sentiment of empty text");
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& w : word_tokens(text)) {
    if (positive_.count(w)) ++pos;
    if (negative_.count(w)) ++neg;
  }
  if (pos + neg == 0) return 0.5;
  return static_cast<double>(pos) / static_cast<double>(pos + neg);
}

std::string FaultInjectingReviewer::complete(const ReviewRequest& request) const {
  if (should_fail_(request)) {
    if (mode_ == Mode::kTimeout) throw Error(ErrorKind::kProviderTimeout, "injected reviewer timeout");
    return "I am unable to provide a score for this submission.";
  }
  return inner_->complete(request);
}

}  // namespace paraprobe::providers
