#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semrex/scoring.hpp"

using namespace semrex;

namespace {

std::vector<BinaryJudgment> judgments(const std::vector<int>& labels, const std::vector<int>& preds) {
  std::vector<BinaryJudgment> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({labels[i] == 1, preds[i] == 1});
  return out;
}

std::vector<LabeledScore> random_scores(std::mt19937_64& rng, std::size_t n, int levels) {
  std::vector<LabeledScore> s;
  s.push_back({true, static_cast<double>(rng() % levels)});
  s.push_back({false, static_cast<double>(rng() % levels)});
  for (std::size_t i = 2; i < n; ++i) s.push_back({rng() % 2 == 0, static_cast<double>(rng() % levels)});
  std::shuffle(s.begin(), s.end(), rng);
  return s;
}

}  // namespace

TEST_CASE("balanced_accuracy: hand confusion matrices") {
  CHECK(balanced_accuracy(judgments({1, 1, 0, 0}, {1, 1, 0, 0})) == 1.0);
  CHECK(balanced_accuracy(judgments({1, 1, 0, 0}, {1, 0, 0, 0})) == 0.75);
  CHECK(balanced_accuracy(judgments({1, 1, 0, 0}, {1, 1, 1, 1})) == 0.5);
  // TPR = 2/3, TNR = 1/5.
  CHECK(balanced_accuracy(judgments({1, 1, 1, 0, 0, 0, 0, 0}, {1, 1, 0, 1, 1, 0, 1, 1})) ==
        doctest::Approx((2.0 / 3 + 1.0 / 5) / 2).epsilon(1e-15));
  CHECK_THROWS_AS(balanced_accuracy(judgments({1, 1}, {1, 0})), ScoringError);
}

TEST_CASE("property: balanced_accuracy order invariance and complement") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    std::vector<BinaryJudgment> j = {{true, rng() % 2 == 0}, {false, rng() % 2 == 0}};
    for (int k = 0; k < 20; ++k) j.push_back({rng() % 2 == 0, rng() % 2 == 0});
    double b = balanced_accuracy(j);
    auto shuffled = j;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(balanced_accuracy(shuffled) == doctest::Approx(b).epsilon(1e-15));
    for (auto& x : j) x.predicted = !x.predicted;
    CHECK(balanced_accuracy(j) == doctest::Approx(1 - b).epsilon(1e-14));
  }
}

TEST_CASE("gini_from_scores: fixed cases") {
  CHECK(gini_from_scores({{true, 2}, {true, 3}, {false, 0}, {false, 1}}) == 1.0);
  CHECK(gini_from_scores({{true, 1}, {true, 1}, {false, 1}, {false, 1}}) == 0.0);
  CHECK(gini_from_scores({{true, 0}, {false, 1}}) == -1.0);
  CHECK_THROWS_AS(gini_from_scores({{true, 1}}), ScoringError);
}

TEST_CASE("property: gini equals 2 * pairwise AUC - 1 on 10k random instances") {
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    auto s = random_scores(rng, 2 + rng() % 40, 1 + static_cast<int>(rng() % 6));
    double diff = std::fabs(gini_from_scores(s) - (2 * test_support::pairwise_auc(s) - 1));
    worst = std::max(worst, diff);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("average_precision: fixed cases") {
  CHECK(average_precision(std::vector<RatedExample>{{true, 2}, {true, 2}, {false, 0}, {false, 0}}) == 1.0);
  // Ranked P N P: (1/1 + 2/3) / 2.
  CHECK(average_precision(std::vector<LabeledScore>{{true, 3}, {false, 2}, {true, 1}}) ==
        doctest::Approx((1 + 2.0 / 3) / 2).epsilon(1e-15));
  // A single tie group of one positive among three: (1/3)(1 + 1/2 + 1/3).
  CHECK(average_precision(std::vector<LabeledScore>{{true, 1}, {false, 1}, {false, 1}}) ==
        doctest::Approx((1 + 0.5 + 1.0 / 3) / 3).epsilon(1e-15));
  CHECK_THROWS_AS(average_precision(std::vector<RatedExample>{{true, 1}, {false, 0}}), ScoringError);
  CHECK_THROWS_AS(average_precision(std::vector<LabeledScore>{{false, 1}}), ScoringError);
}

TEST_CASE("property: average_precision equals the exhaustive tie-permutation oracle (n <= 8)") {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    std::size_t n = 1 + rng() % 8;
    std::vector<LabeledScore> s;
    for (std::size_t k = 0; k < n; ++k) s.push_back({rng() % 2 == 0, static_cast<double>(rng() % 3)});
    s[0].positive = true;
    CHECK(average_precision(s) == doctest::Approx(test_support::exhaustive_tie_ap(s)).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked == 400);
}

TEST_CASE("property: AP of label-independent ratings matches the random-ordering expectation") {
  // Expected AP of a uniformly random ordering of n items with p positives:
  // (1/n) * (H_n * (n - p) / (n - 1) + n * (p - 1) / (n - 1)).
  const double n = 20, p = 10;
  double harmonic = 0;
  for (int k = 1; k <= 20; ++k) harmonic += 1.0 / k;
  const double expected = (harmonic * (n - p) / (n - 1) + n * (p - 1) / (n - 1)) / n;
  std::mt19937_64 rng(31);
  double total = 0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    std::vector<RatedExample> ex;
    for (int k = 0; k < 20; ++k) ex.push_back({k < 10, static_cast<int>(rng() % 2) * 2});
    total += average_precision(ex);
  }
  CHECK(std::fabs(total / reps - expected) < 0.005);
}
