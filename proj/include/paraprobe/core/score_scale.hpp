#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paraprobe/core/rational.hpp"

namespace paraprobe {

/// A conference's rating range and step. Valid scores form the lattice
/// {min, min + increment, ..., max}.
class ScoreScale {
 public:
  /// Throws Error(kInvalidConfig) unless min < max, increment > 0 and the
  /// range is an integer number of increments.
  ScoreScale(Rational min, Rational max, Rational increment);

  const Rational& min() const noexcept { return min_; }
  const Rational& max() const noexcept { return max_; }
  const Rational& increment() const noexcept { return increment_; }

  bool contains(const Rational& score) const;
  bool is_valid_score(double score) const;

  std::int64_t lattice_size() const;
  std::vector<Rational> values() const;

  /// Closest lattice point to `value`, clamped into [min, max]. Ties round up.
  Rational nearest(double value) const;

  double clamp(double value) const;

  friend bool operator==(const ScoreScale&, const ScoreScale&) = default;

 private:
  Rational min_;
  Rational max_;
  Rational increment_;
};

/// Lattice-membership check as a free function, for call sites that read
/// better that way.
bool is_valid_score(double score, const ScoreScale& scale);

namespace scales {
ScoreScale acl();
ScoreScale neurips();
ScoreScale icml();
ScoreScale iclr();
ScoreScale aaai();
}  // namespace scales

}  // namespace paraprobe
