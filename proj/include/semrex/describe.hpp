#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "semrex/data.hpp"
#include "semrex/description.hpp"
#include "semrex/llm.hpp"

namespace semrex {

struct MethodSpec {
  Method method = Method::semantic_regex;
  std::size_t n_fewshot = 4;
  std::size_t n_examples = 10;
  std::size_t tokens_per_example = 32;
  double temperature = 1.0;
  double top_p = 1.0;
  std::optional<double> activation_threshold = 0.30;  // fraction of feature max; unused by token-act-pair
  std::string model = "gpt-4o-mini";

  /// Published settings: token-act-pair (3, 5, 64, 1.0, 1.0, none),
  /// max-acts (3, 20, 32, 0.7, 1.0, 0.60), semantic-regex (4, 10, 32, 1.0, 1.0, 0.30).
  static MethodSpec defaults(Method m);
  /// Empty when valid.
  std::string validate() const;
};

class DescribeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Marker missing from explainer output.
class ExtractionError : public DescribeError {
 public:
  using DescribeError::DescribeError;
};

/// Listing name under data/prompts for a method.
std::string_view prompt_name(Method m);

/// The user turn presenting a feature's examples, in the method's format.
std::string format_feature_examples(const MethodSpec& spec, const FeatureDataset& dataset);

/// System prompt, the first n_fewshot dialogues from the method's listing,
/// then the feature's top examples. Throws DescribeError when the dataset has
/// fewer than n_examples records.
ChatRequest build_messages(const MethodSpec& spec, const FeatureDataset& dataset);

/// semantic-regex: text after the last "SR: "; max-acts: text after the last
/// "[EXPLANATION]:"; token-act-pair: the completion with one trailing period
/// removed. All trimmed. Throws ExtractionError when a marker is missing.
std::string extract_description(Method method, std::string_view raw);

/// Fills extracted and parsed (leniently, for semantic regexes) from raw
/// output; failures are recorded in `diagnostic`.
Description make_description(const FeatureRef& feature, Method method, std::string raw, std::string request_hash);

/// Runs the explainer once. Provider errors propagate; extraction and parse
/// failures are kept on the returned Description.
Description describe_feature(ChatProvider& provider, const MethodSpec& spec, const FeatureDataset& dataset);

}  // namespace semrex
