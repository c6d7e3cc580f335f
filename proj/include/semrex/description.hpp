#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "semrex/data.hpp"
#include "semrex/lang.hpp"

namespace semrex {

enum class Method { token_act_pair, max_acts, semantic_regex };

std::string_view to_string(Method m);
/// Accepts "token-act-pair", "max-acts", "semantic-regex". Throws std::invalid_argument.
Method parse_method(std::string_view name);

struct Description {
  FeatureRef feature;
  Method method = Method::semantic_regex;
  std::string raw_output;
  std::string extracted;
  std::optional<RegexNode> parsed;  // semantic-regex only, when `extracted` parses
  std::string diagnostic;           // extraction or parse failure, empty on success
  std::string request_hash;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

/// Form used for identity comparisons: render(parsed) for parsed semantic
/// regexes, otherwise the whitespace-normalized extracted text (case kept).
std::string canonical_form(const Description& d);

}  // namespace semrex
