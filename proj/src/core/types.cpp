#include "paraprobe/core/types.hpp"

#include <algorithm>

#include "paraprobe/core/error.hpp"

namespace paraprobe {

std::string_view to_string(DocumentFormat format) {
  return format == DocumentFormat::kLatex ? "latex" : "plain";
}

DocumentFormat parse_document_format(std::string_view name) {
  if (name == "latex" || name == "tex") return DocumentFormat::kLatex;
  if (name == "plain" || name == "text" || name == "txt") return DocumentFormat::kPlain;
  throw Error(ErrorKind::kInvalidConfig, "unknown document format '" + std::string(name) + "'");
}

SourceDocument::SourceDocument(std::string source_text, DocumentFormat format, ByteRange target_span,
                               std::vector<ByteRange> paragraph_index)
    : source_text_(std::move(source_text)),
      format_(format),
      target_span_(target_span),
      paragraph_index_(std::move(paragraph_index)) {
  if (target_span_.empty() || target_span_.end > source_text_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "target span must be a non-empty range inside the source");
  }
  for (std::size_t i = 0; i < paragraph_index_.size(); ++i) {
    const auto& p = paragraph_index_[i];
    if (p.empty() || p.end > source_text_.size()) {
      throw Error(ErrorKind::kInvalidArgument, "paragraph range outside the source");
    }
    if (p.overlaps(target_span_)) throw Error(ErrorKind::kInvalidArgument, "paragraph overlaps the target span");
    if (i > 0 && paragraph_index_[i - 1].end > p.begin) {
      throw Error(ErrorKind::kInvalidArgument, "paragraph ranges must be sorted and disjoint");
    }
  }
}

std::string Candidate::id() const {
  return "t" + std::to_string(iteration) + "k" + std::to_string(index);
}

double mean_of(const std::vector<Rational>& scores) {
  if (scores.empty()) return 0.0;
  Rational sum(0);
  for (const auto& s : scores) sum = sum + s;
  return (sum / Rational(static_cast<std::int64_t>(scores.size()))).to_double();
}

bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.mean_score != b.mean_score) return a.mean_score > b.mean_score;
  if (a.candidate.iteration != b.candidate.iteration) return a.candidate.iteration < b.candidate.iteration;
  return a.candidate.index < b.candidate.index;
}

void CandidatePool::append(ScoredCandidate entry) {
  if (entry.candidate.text.empty()) throw Error(ErrorKind::kInvalidArgument, "pool entry with empty text");
  if (entry.similarity < tau_sim_ || entry.ppl_ratio > alpha_ppl_) {
    throw Error(ErrorKind::kInvalidArgument, "pool entry " + entry.candidate.id() + " violates the filter");
  }
  if (entry.raw_scores.empty()) throw Error(ErrorKind::kInvalidArgument, "pool entry without scores");
  entries_.push_back(std::move(entry));
}

const ScoredCandidate& CandidatePool::best() const {
  if (entries_.empty()) throw Error(ErrorKind::kEmptyPool, "candidate pool is empty");
  return *std::min_element(entries_.begin(), entries_.end(), ranks_before);
}

std::vector<ScoredCandidate> CandidatePool::top(std::size_t count) const {
  std::vector<ScoredCandidate> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), ranks_before);
  if (sorted.size() > count) sorted.resize(count);
  return sorted;
}

std::vector<ScoredCandidate> CandidatePool::from_iteration(int iteration) const {
  std::vector<ScoredCandidate> out;
  for (const auto& e : entries_) {
    if (e.candidate.iteration == iteration) out.push_back(e);
  }
  return out;
}

int CandidatePool::latest_iteration() const {
  int latest = -1;
  for (const auto& e : entries_) latest = std::max(latest, e.candidate.iteration);
  return latest;
}

}  // namespace paraprobe
