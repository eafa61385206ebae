#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "paraprobe/core/rational.hpp"
#include "paraprobe/core/score_scale.hpp"
#include "paraprobe/providers/providers.hpp"

namespace paraprobe::providers {

/// Groups of interchangeable single words. Membership is case-insensitive.
class Lexicon {
 public:
  explicit Lexicon(std::vector<std::vector<std::string>> groups);

  std::optional<std::size_t> group_of(std::string_view word) const;
  const std::vector<std::string>& members(std::size_t group) const { return groups_.at(group); }
  std::size_t group_count() const noexcept { return groups_.size(); }
  const std::vector<std::vector<std::string>>& groups() const noexcept { return groups_; }

 private:
  std::vector<std::vector<std::string>> groups_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A text cut into word and non-word segments; `sites` are the word segments
/// whose word belongs to a lexicon group.
struct SiteText {
  std::vector<std::string> segments;
  std::vector<bool> is_word;
  std::vector<std::size_t> sites;        // segment indices
  std::vector<std::size_t> site_groups;  // parallel to sites

  static SiteText parse(std::string_view text, const Lexicon& lexicon);
  std::string join() const;
  /// Replaces the word at site `s`, keeping the original capitalisation.
  void set_site(std::size_t s, const std::string& word);
  std::string site_word(std::size_t s) const;
};

/// Deterministic paraphraser driven by synonym substitution.
///
/// Zero-shot prompts: each site is swapped for a different group member with
/// probability `substitution_rate`. ICL prompts: examples that align with the
/// original site-for-site are ranked by score; a parent is taken from the top
/// (optionally crossed with a second top example) and one to three sites are
/// mutated. The output is a pure function of (prompt, count, seed).
class MockGenerator final : public Generator {
 public:
  struct Options {
    double substitution_rate = 0.35;
    double drift_rate = 0.0;   // heavy rewrite that drops words
    double garble_rate = 0.0;  // letters scrambled inside words
    bool identity_first = false;
    double top_parent_rate = 0.7;
    double crossover_rate = 0.3;
    double revert_rate = 0.15;
  };

  MockGenerator(Lexicon lexicon, Options options);

  std::vector<std::string> generate(std::string_view prompt, int count, std::uint64_t seed) const override;

  const Lexicon& lexicon() const noexcept { return lexicon_; }

 private:
  std::string zero_shot(const SiteText& original, std::uint64_t seed) const;
  std::string refine(const SiteText& original, const std::vector<std::pair<SiteText, double>>& parents,
                     std::uint64_t seed) const;

  Lexicon lexicon_;
  Options options_;
};

/// Hidden scoring function of the mock reviewer.
///
///   pre_noise = base_score + sum over word tokens w of
///               weight(w) * region(w) * (1 + context_coupling * ctx(w))
///
/// region(w) is 1 inside the abstract (or everywhere when the document has no
/// abstract) and `body_weight` elsewhere. ctx(w) in [-1, 1] is a
/// pseudo-random function of w and of the paragraphs outside the abstract
/// (positively weighted words removed), so the same phrasing helps more or
/// less depending on the rest of the paper. Each sample adds N(0, noise_sd) and is clamped and
/// rounded to the lattice.
struct MockReviewerSpec {
  Rational base_score{2};
  std::map<std::string, double> feature_weights;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  double context_coupling = 0.0;  // must stay below 1 so weights keep their sign
  double body_weight = 1.0;
};

class MockReviewer final : public Reviewer {
 public:
  MockReviewer(MockReviewerSpec spec, ScoreScale scale);

  std::string complete(const ReviewRequest& request) const override;

  /// Noise-free, unclamped score.
  double pre_noise_score(std::string_view document) const;
  /// Clamped and lattice-rounded score for one sample seed.
  Rational sample_score(std::string_view document, std::uint64_t seed) const;

  const MockReviewerSpec& spec() const noexcept { return spec_; }
  const ScoreScale& scale() const noexcept { return scale_; }

 private:
  double compute_pre_noise(std::string_view document) const;

  MockReviewerSpec spec_;
  ScoreScale scale_;
  std::unordered_map<std::string, double> weights_;
  mutable std::mutex cache_mu_;
  mutable std::unordered_map<std::uint64_t, double> cache_;
};

/// Token F1: 2·|A∩B| / (|A| + |B|) over lowercase alphanumeric token
/// multisets. Exactly symmetric; identical strings score 1.
class MockSimilarity final : public SimilarityScorer {
 public:
  double similarity(std::string_view a, std::string_view b) const override;
};

/// Character trigram model with add-one smoothing over the byte alphabet,
/// fitted on a reference text. Each text is prefixed with two start symbols.
class MockPerplexity final : public PerplexityScorer {
 public:
  explicit MockPerplexity(std::string_view training_text);
  double perplexity(std::string_view text) const override;

 private:
  std::unordered_map<std::uint32_t, std::uint32_t> trigrams_;
  std::vector<std::uint32_t> bigrams_;
};

/// pos / (pos + neg) over lexicon hits; 0.5 with no hits.
class MockSentiment final : public SentimentScorer {
 public:
  MockSentiment();
  MockSentiment(std::vector<std::string> positive, std::vector<std::string> negative);
  double sentiment(std::string_view text) const override;

 private:
  std::unordered_set<std::string> positive_;
  std::unordered_set<std::string> negative_;
};

/// Counts calls that reach the wrapped reviewer.
class CountingReviewer final : public Reviewer {
 public:
  explicit CountingReviewer(std::shared_ptr<const Reviewer> inner) : inner_(std::move(inner)) {}
  std::string complete(const ReviewRequest& request) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_->complete(request);
  }
  std::int64_t calls() const noexcept { return calls_.load(); }

 private:
  std::shared_ptr<const Reviewer> inner_;
  mutable std::atomic<std::int64_t> calls_{0};
};

class CountingGenerator final : public Generator {
 public:
  explicit CountingGenerator(std::shared_ptr<const Generator> inner) : inner_(std::move(inner)) {}
  std::vector<std::string> generate(std::string_view prompt, int count, std::uint64_t seed) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    texts_.fetch_add(count, std::memory_order_relaxed);
    return inner_->generate(prompt, count, seed);
  }
  std::int64_t calls() const noexcept { return calls_.load(); }
  std::int64_t texts() const noexcept { return texts_.load(); }

 private:
  std::shared_ptr<const Generator> inner_;
  mutable std::atomic<std::int64_t> calls_{0};
  mutable std::atomic<std::int64_t> texts_{0};
};

/// Fails every call for which `should_fail(request)` holds, either by
/// throwing a timeout or by answering without a score marker.
class FaultInjectingReviewer final : public Reviewer {
 public:
  enum class Mode { kTimeout, kGarbage };
  FaultInjectingReviewer(std::shared_ptr<const Reviewer> inner, std::function<bool(const ReviewRequest&)> should_fail,
                         Mode mode = Mode::kTimeout)
      : inner_(std::move(inner)), should_fail_(std::move(should_fail)), mode_(mode) {}

  std::string complete(const ReviewRequest& request) const override;

 private:
  std::shared_ptr<const Reviewer> inner_;
  std::function<bool(const ReviewRequest&)> should_fail_;
  Mode mode_;
};

}  // namespace paraprobe::providers
