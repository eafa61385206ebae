#include "paraprobe/core/score_scale.hpp"

#include <cmath>

#include "paraprobe/core/error.hpp"

namespace paraprobe {

ScoreScale::ScoreScale(Rational min, Rational max, Rational increment)
    : min_(min), max_(max), increment_(increment) {
  if (!(min_ < max_)) throw Error(ErrorKind::kInvalidConfig, "score scale requires min < max");
  if (!(increment_ > Rational(0))) throw Error(ErrorKind::kInvalidConfig, "score scale increment must be positive");
  if (!((max_ - min_) / increment_).is_integer()) {
    throw Error(ErrorKind::kInvalidConfig, "score scale range " + min_.to_string() + ".." + max_.to_string() +
                                               " is not a multiple of " + increment_.to_string());
  }
}

bool ScoreScale::contains(const Rational& score) const {
  if (score < min_ || score > max_) return false;
  return ((score - min_) / increment_).is_integer();
}

bool ScoreScale::is_valid_score(double score) const {
  if (!std::isfinite(score)) return false;
  try {
    return contains(Rational::from_double(score));
  } catch (const Error&) {
    return false;
  }
}

std::int64_t ScoreScale::lattice_size() const {
  return ((max_ - min_) / increment_).num() + 1;
}

std::vector<Rational> ScoreScale::values() const {
  std::vector<Rational> out;
  const auto n = lattice_size();
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out.push_back(min_ + increment_ * Rational(i));
  return out;
}

Rational ScoreScale::nearest(double value) const {
  const double lo = min_.to_double();
  const double step = increment_.to_double();
  double steps = std::floor((value - lo) / step + 0.5);
  const auto last = static_cast<double>(lattice_size() - 1);
  if (!(steps >= 0.0)) steps = 0.0;
  if (steps > last) steps = last;
  return min_ + increment_ * Rational(static_cast<std::int64_t>(steps));
}

double ScoreScale::clamp(double value) const {
  const double lo = min_.to_double();
  const double hi = max_.to_double();
  return value < lo ? lo : (value > hi ? hi : value);
}

bool is_valid_score(double score, const ScoreScale& scale) { return scale.is_valid_score(score); }

namespace scales {
ScoreScale acl() { return {Rational(1), Rational(5), Rational(1, 2)}; }
ScoreScale neurips() { return {Rational(1), Rational(6), Rational(1)}; }
ScoreScale icml() { return {Rational(1), Rational(5), Rational(1)}; }
ScoreScale iclr() { return {Rational(0), Rational(10), Rational(2)}; }
ScoreScale aaai() { return {Rational(1), Rational(8), Rational(1)}; }
}  // namespace scales

}  // namespace paraprobe
