#include "semrex/description.hpp"

#include <stdexcept>

#include "semrex/text.hpp"

namespace semrex {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::token_act_pair: return "token-act-pair";
    case Method::max_acts: return "max-acts";
    case Method::semantic_regex: return "semantic-regex";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "token-act-pair") return Method::token_act_pair;
  if (name == "max-acts") return Method::max_acts;
  if (name == "semantic-regex") return Method::semantic_regex;
  throw std::invalid_argument("unknown description method '" + std::string(name) + "'");
}

std::string canonical_form(const Description& d) {
  if (d.method == Method::semantic_regex && d.parsed) return render(*d.parsed);
  return text::normalize_whitespace(d.extracted);
}

}  // namespace semrex
