#include "semrex/scoring.hpp"

#include <algorithm>

namespace semrex {

namespace {

void require_both_classes(std::size_t pos, std::size_t neg, const char* what) {
  if (pos == 0 || neg == 0) {
    throw ScoringError(std::string(what) + " needs at least one positive and one negative example");
  }
}

}  // namespace

double balanced_accuracy(const std::vector<BinaryJudgment>& judgments) {
  std::size_t pos = 0, neg = 0, tp = 0, tn = 0;
  for (const auto& j : judgments) {
    if (j.positive) {
      ++pos;
      tp += j.predicted;
    } else {
      ++neg;
      tn += !j.predicted;
    }
  }
  require_both_classes(pos, neg, "balanced accuracy");
  return 0.5 * (static_cast<double>(tp) / static_cast<double>(pos) + static_cast<double>(tn) / static_cast<double>(neg));
}

double roc_auc(const std::vector<LabeledScore>& scores) {
  std::vector<LabeledScore> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
  double positive_rank_sum = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (sorted[k].positive) {
        positive_rank_sum += midrank;
        ++pos;
      }
    }
    i = j;
  }
  std::size_t neg = sorted.size() - pos;
  require_both_classes(pos, neg, "AUC");
  double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (positive_rank_sum - p * (p + 1) / 2) / (p * n);
}

double gini_from_scores(const std::vector<LabeledScore>& scores) {
  return std::clamp(2 * roc_auc(scores) - 1, -1.0, 1.0);
}

double average_precision(const std::vector<LabeledScore>& scores) {
  std::vector<LabeledScore> sorted = scores;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  std::size_t total_pos = 0;
  for (const auto& s : sorted) total_pos += s.positive;
  if (total_pos == 0) throw ScoringError("average precision needs at least one positive example");

  double sum = 0;
  double pos_before = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) ++j;
    const double n = static_cast<double>(j - i);
    double p = 0;
    for (std::size_t k = i; k < j; ++k) p += sorted[k].positive;
    if (p > 0) {
      // Position t of the group holds a positive with probability p/n; given
      // that, the expected number of positives among positions 1..t of the
      // group is 1 + (t-1)(p-1)/(n-1).
      for (std::size_t t = 1; t <= j - i; ++t) {
        double td = static_cast<double>(t);
        double extra = n > 1 ? (td - 1) * (p - 1) / (n - 1) : 0.0;
        sum += (p / n) * (pos_before + 1 + extra) / (static_cast<double>(i) + td);
      }
    }
    pos_before += p;
    i = j;
  }
  return sum / static_cast<double>(total_pos);
}

std::vector<RatedExample> discard_ambiguous(const std::vector<RatedExample>& rated) {
  std::vector<RatedExample> out;
  for (const auto& r : rated) {
    if (r.rating != 1) out.push_back(r);
  }
  return out;
}

double average_precision(const std::vector<RatedExample>& rated) {
  std::vector<LabeledScore> scores;
  for (const auto& r : discard_ambiguous(rated)) scores.push_back({r.positive, static_cast<double>(r.rating)});
  return average_precision(scores);
}

}  // namespace semrex
