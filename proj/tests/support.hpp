#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace test_support {

inline std::string fixture_path(const std::string& name) { return std::string(SEMREX_FIXTURES) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Tab-separated rows, skipping blank lines and `#` comments.
inline std::vector<std::vector<std::string>> read_tsv(const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(fixture_path(name)));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    rows.push_back(std::move(cols));
  }
  return rows;
}

}  // namespace test_support

#include "semrex/matcher.hpp"

namespace test_support {

/// A document written with `<<` `>>` around the expected match, as in the
/// language description's examples.
struct AnnotatedDoc {
  semrex::WordSequence doc;
  std::size_t start_word = 0;
  std::size_t end_word = 0;
};

inline AnnotatedDoc annotated(const std::string& marked) {
  std::string plain;
  std::size_t begin = 0, end = 0;
  for (std::size_t i = 0; i < marked.size();) {
    if (marked.compare(i, 2, "<<") == 0) {
      begin = plain.size();
      i += 2;
    } else if (marked.compare(i, 2, ">>") == 0) {
      end = plain.size();
      i += 2;
    } else {
      plain += marked[i++];
    }
  }
  AnnotatedDoc out{semrex::WordSequence::from_text(plain)};
  bool first = true;
  for (std::size_t w = 0; w < out.doc.size(); ++w) {
    const auto& off = out.doc.offsets[w];
    if (off.end > begin && off.begin < end) {
      if (first) out.start_word = w;
      first = false;
      out.end_word = w + 1;
    }
  }
  return out;
}

struct LanguageExample {
  std::string regex;
  std::string marked;
  bool matches;
};

/// The match and non-match assertions from the semantic regex language description.
inline std::vector<LanguageExample> language_examples() {
  return {
      {"[:symbol running:]", "I am<< running>>", true},
      {"[:symbol running:]", "<< running>> faster", true},
      {"[:lexeme run:]", "she<< ran>>", true},
      {"[:lexeme run:]", "it's<< running>> quickly", true},
      {"[:field run:]", "out for a << jog>>", true},
      {"[:field run:]", "<< sprint>> for gold", true},
      {"[:symbol run:] [:lexeme fast:]", "I<< run fast>>", true},
      {"[:symbol run:] [:lexeme fast:]", "they<< run faster>>", true},
      {"[:symbol run:]|[:symbol walk:]", "I<< run>>", true},
      {"[:symbol run:]|[:symbol walk:]", "I<< walk>>", true},
      {"[:lexeme run:] [:symbol very:]? [:symbol fast:]", "I am<< running fast>>", true},
      {"[:lexeme run:] [:symbol very:]? [:symbol fast:]", "I<< run very fast>>", true},
      {"@{:context political:}([:lexeme run:])", "she<< ran>> for office", true},
      {"@{:context political:}([:lexeme run:])", "<<running>> for govenor", true},
      {"@{:context political:}([:lexeme run:])", "I<< run>> marathons", false},
  };
}

/// True when the example holds: a positive example's highlighted span is
/// matched; a negative example has no match at that span.
inline bool language_example_holds(const LanguageExample& ex, const semrex::OracleBundle& oracles) {
  auto doc = annotated(ex.marked);
  auto spans = semrex::find_matches(semrex::parse(ex.regex), doc.doc, oracles);
  bool found = false;
  for (const auto& s : spans) {
    if (s.start_word == doc.start_word && s.end_word == doc.end_word) found = true;
  }
  return found == ex.matches;
}

}  // namespace test_support
