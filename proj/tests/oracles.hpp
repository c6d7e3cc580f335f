#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "semrex/scoring.hpp"

namespace test_support {

/// AUC by comparing every positive with every negative; ties count one half.
inline double pairwise_auc(const std::vector<semrex::LabeledScore>& s) {
  double wins = 0, pairs = 0;
  for (const auto& p : s) {
    if (!p.positive) continue;
    for (const auto& n : s) {
      if (n.positive) continue;
      pairs += 1;
      wins += p.score > n.score ? 1.0 : p.score == n.score ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

/// Mean AP over every ordering of the examples that is consistent with the
/// scores (non-increasing), each ordering weighted equally.
inline double exhaustive_tie_ap(const std::vector<semrex::LabeledScore>& s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double total_pos = 0;
  for (const auto& x : s) total_pos += x.positive;
  double sum = 0, orderings = 0;
  do {
    bool consistent = true;
    for (std::size_t k = 1; k < idx.size() && consistent; ++k) consistent = s[idx[k - 1]].score >= s[idx[k]].score;
    if (!consistent) continue;
    double hits = 0, ap = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (s[idx[k]].positive) {
        hits += 1;
        ap += hits / static_cast<double>(k + 1);
      }
    }
    sum += ap / total_pos;
    orderings += 1;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return sum / orderings;
}

/// P(T > t) for integer degrees of freedom from the finite trigonometric
/// series for the two-sided probability A(t | df).
inline double t_upper_series(double t, int df) {
  const double pi = std::acos(-1.0);
  double theta = std::atan(std::fabs(t) / std::sqrt(static_cast<double>(df)));
  double c = std::cos(theta), s = std::sin(theta);
  double a;
  if (df % 2 == 1) {
    double term = c, sum = df > 1 ? c : 0.0;
    for (int k = 3; k <= df - 2; k += 2) {
      term *= c * c * (k - 1) / k;
      sum += term;
    }
    a = 2.0 / pi * (theta + s * sum);
  } else {
    double term = 1, sum = 1;
    for (int k = 2; k <= df - 2; k += 2) {
      term *= c * c * (k - 1) / k;
      sum += term;
    }
    a = s * sum;
  }
  double upper = (1 - a) / 2;
  return t >= 0 ? upper : 1 - upper;
}

}  // namespace test_support
