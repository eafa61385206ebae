#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "paraprobe/core/rational.hpp"

namespace paraprobe {

/// Half-open byte range [begin, end) into a source text.
struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end <= begin; }
  bool overlaps(const ByteRange& other) const noexcept { return begin < other.end && other.begin < end; }
  std::string_view slice(std::string_view text) const { return text.substr(begin, end - begin); }

  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

enum class DocumentFormat { kLatex, kPlain };

std::string_view to_string(DocumentFormat format);
DocumentFormat parse_document_format(std::string_view name);

/// The paper under review together with the span the search rewrites.
class SourceDocument {
 public:
  /// Validates: target inside the text and non-empty; paragraphs sorted,
  /// pairwise disjoint and disjoint from the target.
  SourceDocument(std::string source_text, DocumentFormat format, ByteRange target_span,
                 std::vector<ByteRange> paragraph_index = {});

  const std::string& source_text() const noexcept { return source_text_; }
  DocumentFormat format() const noexcept { return format_; }
  const ByteRange& target_span() const noexcept { return target_span_; }
  const std::vector<ByteRange>& paragraph_index() const noexcept { return paragraph_index_; }

  std::string_view target_text() const { return target_span_.slice(source_text_); }

 private:
  std::string source_text_;
  DocumentFormat format_;
  ByteRange target_span_;
  std::vector<ByteRange> paragraph_index_;
};

/// One paraphrase proposal, identified by (iteration, index) with 1-based index.
struct Candidate {
  std::string text;
  int iteration = 0;
  int index = 1;
  std::vector<std::string> parent_examples;

  std::string id() const;
};

struct ScoredCandidate {
  Candidate candidate;
  double similarity = 0.0;
  double ppl_ratio = 1.0;
  std::vector<Rational> raw_scores;
  double mean_score = 0.0;
};

double mean_of(const std::vector<Rational>& scores);

/// Total order used for argmax and top-K selection: higher mean first, then
/// earlier iteration, then lower index.
bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b);

/// Cumulative, append-only collection of filter-passing candidates.
class CandidatePool {
 public:
  CandidatePool(double tau_sim, double alpha_ppl) : tau_sim_(tau_sim), alpha_ppl_(alpha_ppl) {}

  /// Throws Error(kInvalidArgument) when the entry breaks a pool invariant.
  void append(ScoredCandidate entry);

  const std::vector<ScoredCandidate>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Argmax under ranks_before. Throws Error(kEmptyPool) when empty.
  const ScoredCandidate& best() const;

  /// Entries sorted by ranks_before, truncated to `count`.
  std::vector<ScoredCandidate> top(std::size_t count) const;

  std::vector<ScoredCandidate> from_iteration(int iteration) const;
  /// Highest iteration with at least one entry; -1 when empty.
  int latest_iteration() const;

 private:
  double tau_sim_;
  double alpha_ppl_;
  std::vector<ScoredCandidate> entries_;
};

}  // namespace paraprobe
