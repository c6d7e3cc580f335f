#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semrex/lang.hpp"

namespace semrex {

/// Whitespace-delimited words of a document with their character ranges.
struct WordSequence {
  std::string text;
  std::vector<std::string> words;
  std::vector<CharSpan> offsets;

  static WordSequence from_text(std::string_view text);

  std::size_t size() const { return words.size(); }
  bool empty() const { return words.empty(); }
  /// Single-space join of words [begin, end).
  std::string join(std::size_t begin, std::size_t end) const;
};

struct MatchSpan {
  std::size_t start_word = 0;
  std::size_t end_word = 0;  // exclusive
  // Top-level branch that produced the span; borrowed from the matched regex.
  const RegexNode* via = nullptr;

  friend bool operator==(const MatchSpan& a, const MatchSpan& b) {
    return a.start_word == b.start_word && a.end_word == b.end_word;
  }
  friend bool operator<(const MatchSpan& a, const MatchSpan& b) {
    return std::pair(a.start_word, a.end_word) < std::pair(b.start_word, b.end_word);
  }
};

using LemmaOracle = std::function<std::string(std::string_view word)>;
using FieldOracle = std::function<bool(std::string_view phrase, std::string_view label)>;
using ContextOracle = std::function<bool(std::string_view document, std::string_view label)>;

struct OracleBundle {
  LemmaOracle lexical;
  FieldOracle field;
  ContextOracle context;
  std::size_t max_field_words = 5;
};

enum class SymbolPolicy {
  substring,    // payload may occur inside words, e.g. [:symbol ing:] in "running"
  whole_words,  // payload must equal the joined words exactly
};

struct MatchOptions {
  SymbolPolicy symbol_policy = SymbolPolicy::substring;
};

/// Raised when an oracle throws while judging a span.
class OracleError : public std::runtime_error {
 public:
  OracleError(const std::string& what, std::size_t start_word, std::size_t end_word)
      : std::runtime_error(what), start_word(start_word), end_word(end_word) {}
  std::size_t start_word;
  std::size_t end_word;
};

/// All non-empty spans of `doc` derivable from `regex`, deduplicated and
/// sorted by (start, end).
///
/// Matching compiles the regex into a Thompson-style automaton whose
/// primitive edges consume variable-length word spans, then runs a
/// position-indexed reachability pass from every start word. Symbols need
/// `k` words where `k - 1` is the number of spaces in the payload; lexemes
/// need one word per payload word; fields try 1..max_field_words words.
std::vector<MatchSpan> find_matches(const RegexNode& regex, const WordSequence& doc,
                                    const OracleBundle& oracles, MatchOptions options = {});

/// Whether a symbol payload matches words [begin, end) under `policy`.
bool symbol_matches(std::string_view payload, const WordSequence& doc, std::size_t begin,
                    std::size_t end, SymbolPolicy policy);

/// Word normalization used before lemmatizing: outer punctuation stripped.
std::string_view lexeme_surface(std::string_view word);

/// Minimal token range [first, last) whose characters cover the span's words.
/// `token_offsets` are the character ranges of the tokens in `doc.text`.
std::pair<std::size_t, std::size_t> covering_tokens(const MatchSpan& span, const WordSequence& doc,
                                                    std::span<const CharSpan> token_offsets);

// ---------------------------------------------------------------------------
// Oracle backends

using Gazetteer = std::map<std::string, std::set<std::string>, std::less<>>;

/// Parses `label<TAB>phrase` lines. Labels and phrases are lowercased and
/// whitespace-normalized; lookups normalize the queried label the same way.
Gazetteer parse_gazetteer(std::string_view content);
Gazetteer load_gazetteer(const std::filesystem::path& path);

/// Accepts a phrase iff its lowercased, whitespace-normalized form (outer
/// punctuation stripped) is listed under `label`. Unknown labels accept nothing.
FieldOracle wordlist_field_oracle(Gazetteer gazetteer);

/// Accepts a document iff any phrase listed under `label` occurs in it as a
/// run of whole words (case-insensitive, outer punctuation stripped).
ContextOracle keyword_context_oracle(Gazetteer keywords);

/// Shipped defaults: default_lemma plus the bundled field and context word lists.
OracleBundle default_oracles();

/// Memoizes a field or context oracle on disk. Keys are content addressed by
/// hash(backend id, label, phrase); concurrent identical inserts are harmless.
class OracleCache {
 public:
  OracleCache(std::filesystem::path dir, std::string backend_id);

  bool lookup_or_compute(std::string_view label, std::string_view phrase,
                         const std::function<bool()>& compute);
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  std::string backend_id_;
  std::mutex mutex_;
  std::unordered_map<std::string, bool> memory_;
  std::size_t misses_ = 0;
};

/// Field and context oracles share a (text, label) signature, so one wrapper serves both.
FieldOracle memoize_oracle(FieldOracle oracle, std::shared_ptr<OracleCache> cache);

}  // namespace semrex
