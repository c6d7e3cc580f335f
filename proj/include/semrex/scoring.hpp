#pragma once

#include <stdexcept>
#include <vector>

namespace semrex {

/// Raised when a score is undefined for the inputs, e.g. a missing class.
class ScoringError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BinaryJudgment {
  bool positive = false;  // ground truth: activating example
  bool predicted = false;
};

struct LabeledScore {
  bool positive = false;
  double score = 0.0;
};

struct RatedExample {
  bool positive = false;
  int rating = 0;  // 0, 1 or 2
};

/// (TPR + TNR) / 2. Needs at least one example of each class.
double balanced_accuracy(const std::vector<BinaryJudgment>& judgments);

/// ROC AUC from the rank-sum statistic with midranks for ties.
double roc_auc(const std::vector<LabeledScore>& scores);

/// 2 AUC - 1, clamped to [-1, 1].
double gini_from_scores(const std::vector<LabeledScore>& scores);

/// Average precision over examples ranked by score, highest first. Within a
/// group of tied scores the precision at each position is its expectation
/// over all orderings of the group. Needs at least one positive.
double average_precision(const std::vector<LabeledScore>& scores);

/// Drops examples rated 1 (ambiguous).
std::vector<RatedExample> discard_ambiguous(const std::vector<RatedExample>& rated);

/// Average precision with the rating as score, after discarding 1s.
double average_precision(const std::vector<RatedExample>& rated);

}  // namespace semrex
