#include <random>

#include <omp.h>

#include "doctest.h"
#include "random_regex.hpp"
#include "semrex/corpus.hpp"
#include "semrex/lemma.hpp"
#include "support.hpp"

using namespace semrex;

namespace {

std::vector<WordSequence> random_corpus(std::uint64_t seed, std::size_t n) {
  static const std::vector<std::string> vocab = {"run", "runs", "ran", "running", "fast", "faster", "very", "the",
                                                 "a",   "jog",  "red", "blue",    "dark", "go",     "for",  "times"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(0, 20);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::vector<WordSequence> docs;
  for (std::size_t d = 0; d < n; ++d) {
    std::string text;
    int words = len(rng);
    for (int i = 0; i < words; ++i) text += (i ? " " : "") + vocab[pick(rng)];
    docs.push_back(WordSequence::from_text(text));
  }
  return docs;
}

bool same_spans(const std::vector<std::vector<MatchSpan>>& a, const std::vector<std::vector<MatchSpan>>& b) {
  return a == b;
}

struct ThreadCount {
  int saved = omp_get_max_threads();
  explicit ThreadCount(int n) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("match_corpus agrees with the serial reference") {
  ThreadCount threads(4);
  auto oracles = default_oracles();
  auto docs = random_corpus(11, 400);
  test_support::RegexGenerator gen(5, {"run", "fast", "the", "a", "un", "color", "run fast", "red"},
                                   {"sport", "politics", "none"});
  for (int i = 0; i < 40; ++i) {
    auto regex = gen.generate(6, 4);
    CAPTURE(render(regex));
    CHECK(same_spans(match_corpus(regex, docs, oracles), match_corpus_serial(regex, docs, oracles)));
  }
}

TEST_CASE("match_corpus: empty corpus and per-document independence") {
  ThreadCount threads(3);
  auto oracles = default_oracles();
  auto regex = parse("[:lexeme run:] [:symbol fast:]");
  CHECK(match_corpus(regex, {}, oracles).empty());
  auto docs = random_corpus(2, 50);
  auto all = match_corpus(regex, docs, oracles);
  for (std::size_t i = 0; i < docs.size(); ++i) CHECK(all[i] == find_matches(regex, docs[i], oracles));
}

TEST_CASE("match_corpus propagates oracle failures") {
  ThreadCount threads(4);
  OracleBundle oracles = default_oracles();
  oracles.field = [](std::string_view, std::string_view) -> bool { throw std::runtime_error("field oracle down"); };
  auto docs = random_corpus(3, 100);
  CHECK_THROWS(match_corpus(parse("[:field color:]"), docs, oracles));
}

TEST_CASE("profile_corpus agrees with the serial reference") {
  ThreadCount threads(4);
  std::vector<std::string> regexes;
  // Strict parsing rejects the two malformed inputs and the lenient-only rows.
  std::size_t expected_failures = 2;
  for (const auto& row : test_support::read_tsv("listing_regexes.tsv")) {
    regexes.push_back(row[0]);
    expected_failures += row[1] == "1" ? 1 : 0;
  }
  regexes.push_back("[:symbol a");
  regexes.push_back("");
  test_support::RegexGenerator gen(9, {"x", "y z", "w"}, {"c"});
  for (int i = 0; i < 500; ++i) regexes.push_back(render(gen.generate(8, 5)));

  auto parallel = profile_corpus(regexes);
  auto serial = profile_corpus_serial(regexes);
  REQUIRE(parallel.size() == serial.size());
  std::size_t failures = 0;
  for (std::size_t i = 0; i < regexes.size(); ++i) {
    CAPTURE(regexes[i]);
    REQUIRE(parallel[i].profile.has_value() == serial[i].profile.has_value());
    CHECK(parallel[i].error == serial[i].error);
    if (!parallel[i].profile) {
      ++failures;
      continue;
    }
    const auto &p = *parallel[i].profile, &s = *serial[i].profile;
    CHECK(p.n_components == s.n_components);
    CHECK(p.structure == s.structure);
    CHECK(p.depth == s.depth);
    CHECK(p.symbols + p.lexemes + p.fields + p.contexts == p.n_components);
  }
  CHECK(failures == expected_failures);
}
