#pragma once

// Reference computations for the tests. Each one is written from the
// definition by brute force and shares no code with the library.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace oracle {

/// Two-sided Wilcoxon signed-rank p-value by enumerating all 2^n sign
/// assignments of the (average) ranks. Zeros are dropped first.
inline double wilcoxon_p(std::vector<double> d) {
  d.erase(std::remove(d.begin(), d.end(), 0.0), d.end());
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::fabs(d[a]) < std::fabs(d[b]); });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
    i = j + 1;
  }
  double w = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (d[i] > 0) w += rank[i];
  }
  const double mean = total / 2.0;
  const double obs = std::fabs(w - mean);
  std::uint64_t extreme = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) s += rank[i];
    }
    if (std::fabs(s - mean) >= obs - 1e-9) ++extreme;
  }
  return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(count));
}

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0;
    double equal = 0.0;
    for (const double x : v) {
      if (x < v[i]) ++less;
      if (x == v[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

/// Two-sided permutation p-value: share of orderings of y whose |rho| is at
/// least the observed one.
inline double spearman_p(const std::vector<double>& x, const std::vector<double>& y) {
  const double obs = std::fabs(spearman_rho(x, y));
  std::vector<std::size_t> perm(y.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  do {
    std::vector<double> yp(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yp[i] = y[perm[i]];
    if (std::fabs(spearman_rho(x, yp)) >= obs - 1e-12) ++hits;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

inline double auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double s = 0.0;
  for (const double p : pos) {
    for (const double q : neg) s += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  }
  return s / static_cast<double>(pos.size() * neg.size());
}

inline std::map<std::string, int> token_bag(const std::string& s) {
  std::map<std::string, int> bag;
  std::string cur;
  for (const char c : s + " ") {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      ++bag[cur];
      cur.clear();
    }
  }
  return bag;
}

/// 2·|A∩B| / (|A| + |B|) over token multisets.
inline double token_f1(const std::string& a, const std::string& b) {
  const auto ba = token_bag(a);
  const auto bb = token_bag(b);
  int na = 0;
  int nb = 0;
  int common = 0;
  for (const auto& [w, c] : ba) na += c;
  for (const auto& [w, c] : bb) nb += c;
  for (const auto& [w, c] : ba) {
    const auto it = bb.find(w);
    if (it != bb.end()) common += std::min(c, it->second);
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * common / static_cast<double>(na + nb);
}

/// Every text obtained from `words` by choosing, independently at each slot,
/// one of that slot's alternatives. `slots[i]` lists the alternatives of the
/// i-th variable word; the template `parts` interleaves fixed text and slots
/// (parts.size() == slots.size() + 1).
inline void enumerate_texts(const std::vector<std::string>& parts, const std::vector<std::vector<std::string>>& slots,
                            const std::function<void(const std::string&)>& visit) {
  std::vector<std::size_t> pick(slots.size(), 0);
  while (true) {
    std::string text = parts[0];
    for (std::size_t i = 0; i < slots.size(); ++i) text += slots[i][pick[i]] + parts[i + 1];
    visit(text);
    std::size_t i = 0;
    while (i < slots.size() && ++pick[i] == slots[i].size()) pick[i++] = 0;
    if (i == slots.size()) break;
  }
}

}  // namespace oracle
