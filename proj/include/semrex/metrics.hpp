#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "semrex/backend.hpp"
#include "semrex/data.hpp"
#include "semrex/description.hpp"
#include "semrex/llm.hpp"

namespace semrex {

enum class MetricId { detection, fuzzing, responsiveness, purity, clarity, faithfulness };

std::string_view to_string(MetricId m);
MetricId parse_metric(std::string_view name);

struct EvaluatorConfig {
  std::string model = "gpt-4o-mini";
  double temperature = 0.7;
  double top_p = 1.0;
  std::optional<int> max_tokens;
  std::size_t examples_per_call = 5;
  std::size_t tokens_per_example = 32;
  std::size_t max_concurrent_calls = 8;

  /// Published settings per metric: detection and fuzzing 5 per call at 0.7
  /// with 500 completion tokens; rating metrics 15 per call at 1.0; clarity and
  /// faithfulness at 1.0.
  static EvaluatorConfig defaults(MetricId m);
  nlohmann::json to_json() const;
};

struct ExampleDetail {
  std::size_t id = 0;        // position shown to the evaluator
  bool positive = false;     // activating example (or steered generation)
  std::string text;
  std::optional<int> judgment;  // 0/1 verdict or 0/1/2 rating; empty when unscored
  double score = 0.0;           // clarity: peak activation
  std::string group;            // faithfulness: modification factor
};

struct MetricResult {
  MetricId metric = MetricId::detection;
  double score = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::vector<ExampleDetail> details;
  std::vector<std::string> warnings;
  bool skipped = false;   // never scored (backend unavailable); score is NaN
  bool flagged = false;   // scored, but outside the usual reporting range
  Usage usage;
  nlohmann::json config;

  nlohmann::json to_json() const;
};

/// Text shown to evaluators: render(parsed) for parsed semantic regexes,
/// otherwise the extracted text.
std::string evaluator_description(const Description& d);

/// Whether evaluator prompts use the semantic-regex variants.
bool uses_regex_prompts(const Description& d);

/// First bracketed list of 0/1 integers. Empty on failure.
std::optional<std::vector<int>> parse_binary_list(std::string_view reply);
/// First brace-delimited id -> rating mapping with ratings in {0,1,2}.
std::optional<std::map<std::size_t, int>> parse_rating_map(std::string_view reply);
/// First bracketed list of strings, JSON or Python quoting.
std::optional<std::vector<std::string>> parse_string_list(std::string_view reply);

/// Evaluator text for an example: newlines escaped as `\n`, as in the
/// evaluator few-shots.
std::string evaluator_text(std::string_view text);

struct ScoringInput {
  const Description& description;
  const std::vector<ActivationRecord>& positives;
  const std::vector<ActivationRecord>& negatives;
  double feature_max = 0.0;
  std::uint64_t seed = 0;
};

/// Positives and negatives windowed, shuffled by seed, judged in batches;
/// score is balanced accuracy. A batch whose reply fails to parse is re-asked
/// once, then excluded with a warning.
MetricResult run_detection(ChatProvider& evaluator, const ScoringInput& in, const EvaluatorConfig& config);

/// As detection, with positives highlighted at `threshold` of feature_max and
/// negatives highlighted with transferred positive patterns.
MetricResult run_fuzzing(ChatProvider& evaluator, const ScoringInput& in, double threshold,
                         const EvaluatorConfig& config);

struct RatingResult {
  MetricResult responsiveness;
  MetricResult purity;
};

/// Ratings 0/1/2 in batches; 1s discarded; responsiveness = max(Gini, 0),
/// purity = average precision.
RatingResult run_rating(ChatProvider& evaluator, const ScoringInput& in, const EvaluatorConfig& config);

struct ClarityConfig {
  EvaluatorConfig evaluator = EvaluatorConfig::defaults(MetricId::clarity);
  std::size_t generation_calls = 10;
  std::size_t sequences_per_call = 5;
};

/// Generated sequences versus an equal number of negatives, scored by peak
/// activation; clarity = max(Gini, 0).
MetricResult run_clarity(ChatProvider& evaluator, ActivationBackend& backend, const Description& description,
                         const std::vector<ActivationRecord>& negatives, std::uint64_t seed,
                         const ClarityConfig& config);

struct FaithfulnessConfig {
  EvaluatorConfig evaluator = EvaluatorConfig::defaults(MetricId::faithfulness);
  std::vector<double> factors = {0, 1, 10, 100};
  std::size_t n_prompts = 10;
  std::size_t n_tokens = 30;
  bool ratio = false;  // p_f / p_0 instead of p_f - p_0
};

/// p_f = share of rating-2 among non-1 ratings of continuations steered at
/// f * feature_max; score = max over f > 0 of p_f - p_0 (or the ratio).
/// Reported skipped when the steering backend is unavailable.
MetricResult run_faithfulness(ChatProvider& evaluator, SteeringBackend& backend, const Description& description,
                              const std::vector<ActivationRecord>& prompts, double feature_max,
                              std::uint64_t seed, const FaithfulnessConfig& config);

/// Combines per-factor proportions (index 0 is the ablation) into the score.
double faithfulness_score(const std::vector<double>& proportions, bool ratio);

// ---------------------------------------------------------------------------
// Offline evaluators.

enum class JudgePolicy { oracle, all_positive, all_negative, inverted };

std::string_view to_string(JudgePolicy p);
JudgePolicy parse_judge_policy(std::string_view name);

/// Answers detection, fuzzing and rating prompts from a table of example text
/// (as shown to the evaluator, whitespace-normalized) to ground-truth label.
/// Unknown texts count as negative. Generation prompts receive `generated`.
class LabelEvaluator : public ChatProvider {
 public:
  LabelEvaluator(JudgePolicy policy, std::vector<std::string> generated = {});
  void add_truth(const std::string& text, bool positive);
  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override;

 private:
  bool verdict(const std::string& text) const;
  JudgePolicy policy_;
  std::vector<std::string> generated_;
  std::map<std::string, bool> truth_;
};

}  // namespace semrex
