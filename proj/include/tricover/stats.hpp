#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace tricover {

/// One table row: completion-time statistics for a team size.
struct SweepRow {
  int team_size{0};
  double min{0.0};
  double max{0.0};
  double avg{0.0};
  double std{0.0};  // Bessel-corrected
  int runs{0};
  int nonterminated{0};

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

using SweepStats = std::vector<SweepRow>;

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Sample standard deviation with the n - 1 denominator.
inline double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_std: need at least 2 values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline SweepRow summarize(int team_size, std::span<const double> xs, int nonterminated = 0) {
  if (xs.size() < 2) throw std::invalid_argument("summarize: need at least 2 runs");
  SweepRow r;
  r.team_size = team_size;
  r.min = *std::min_element(xs.begin(), xs.end());
  r.max = *std::max_element(xs.begin(), xs.end());
  r.avg = mean(xs);
  r.std = sample_std(xs);
  r.runs = static_cast<int>(xs.size());
  r.nonterminated = nonterminated;
  // the mean can round a hair outside [min, max] for constant data
  r.avg = std::clamp(r.avg, r.min, r.max);
  return r;
}

/// One-sided rank-sum test (Wilcoxon / Mann-Whitney), normal approximation
/// with tie correction. Returns the p-value for H1: values in `a` tend to be
/// larger than values in `b`.
inline double rank_sum_p_greater(std::span<const double> a, std::span<const double> b) {
  const std::size_t n1 = a.size(), n2 = b.size();
  if (n1 == 0 || n2 == 0) throw std::invalid_argument("rank_sum_p_greater: empty sample");
  std::vector<std::pair<double, int>> all;
  for (double x : a) all.emplace_back(x, 0);
  for (double x : b) all.emplace_back(x, 1);
  std::sort(all.begin(), all.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
  const double N = static_cast<double>(n1 + n2);
  double rank_a = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second == 0) rank_a += avg_rank;
    }
    i = j;
  }
  const double U = rank_a - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
  const double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
  const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 * ((N + 1.0) - tie_term / (N * (N - 1.0)));
  if (var <= 0.0) return 0.5;
  const double z = (U - mu - 0.5) / std::sqrt(var);  // continuity correction
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

/// Least-squares slope and R^2 of y on x.
struct LinearFit {
  double slope{0.0};
  double intercept{0.0};
  double r2{0.0};
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 paired values");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace tricover
