#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semrex/analysis.hpp"
#include "semrex/matcher.hpp"

namespace semrex {

// Corpus-wide kernels. Each has an OpenMP version and a serial reference with
// identical results; the serial one exists for testing and benchmarking.

/// Matches of `regex` in every document, in document order.
std::vector<std::vector<MatchSpan>> match_corpus(const RegexNode& regex, const std::vector<WordSequence>& docs,
                                                 const OracleBundle& oracles, MatchOptions options = {});
std::vector<std::vector<MatchSpan>> match_corpus_serial(const RegexNode& regex,
                                                        const std::vector<WordSequence>& docs,
                                                        const OracleBundle& oracles, MatchOptions options = {});

struct ProfileOutcome {
  std::optional<ComplexityProfile> profile;
  std::string error;  // parse error message when profile is empty
};

/// Parses each semantic regex and profiles its complexity.
std::vector<ProfileOutcome> profile_corpus(const std::vector<std::string>& regexes);
std::vector<ProfileOutcome> profile_corpus_serial(const std::vector<std::string>& regexes);

/// Worker threads the parallel kernels will use.
int corpus_threads();

}  // namespace semrex
