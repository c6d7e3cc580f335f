#include <chrono>
#include <iostream>
#include <random>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "semrex/corpus.hpp"

using namespace semrex;

namespace {

std::vector<WordSequence> make_corpus(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> vocab = {"the",   "a",     "run",   "ran",     "running", "fast", "slow",
                                                 "red",   "blue",  "green", "market",  "river",   "city", "vote",
                                                 "party", "mayor", "year",  "forever", "home",    "dark", "light"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(8, 64);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::vector<WordSequence> docs;
  docs.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    std::string text;
    int words = len(rng);
    for (int i = 0; i < words; ++i) text += (i ? " " : "") + vocab[pick(rng)];
    docs.push_back(WordSequence::from_text(text));
  }
  return docs;
}

template <class F>
double time_ms(int reps, F&& f) {
  auto best = std::chrono::duration<double, std::milli>::max();
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0));
  }
  return best.count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP timings of the corpus kernels"};
  std::size_t docs_n = 20000, regex_n = 20000;
  int reps = 3;
  app.add_option("--docs", docs_n, "Documents to match");
  app.add_option("--regexes", regex_n, "Regexes to profile");
  app.add_option("--reps", reps, "Repetitions; the best time is reported");
  CLI11_PARSE(app, argc, argv);

  auto docs = make_corpus(docs_n, 1);
  auto oracles = default_oracles();
  auto regex = parse("([:lexeme run:] [:symbol fast:]? | [:field color:]) ([:lexeme river:] | [:symbol market:])?");

  std::vector<std::string> regexes;
  const std::vector<std::string> pool = {"[:lexeme run:] [:symbol fast:]?", "{:context politics:} ([:field title:] [:field name:])",
                                         "[:symbol a:] | [:symbol b:] | ([:lexeme c:] [:field d:])", "[:symbol broken"};
  for (std::size_t i = 0; i < regex_n; ++i) regexes.push_back(pool[i % pool.size()]);

  std::size_t serial_hits = 0, parallel_hits = 0;
  double ms_match_serial = time_ms(reps, [&] {
    serial_hits = 0;
    for (const auto& m : match_corpus_serial(regex, docs, oracles)) serial_hits += m.size();
  });
  double ms_match_parallel = time_ms(reps, [&] {
    parallel_hits = 0;
    for (const auto& m : match_corpus(regex, docs, oracles)) parallel_hits += m.size();
  });
  double ms_profile_serial = time_ms(reps, [&] { profile_corpus_serial(regexes); });
  double ms_profile_parallel = time_ms(reps, [&] { profile_corpus(regexes); });

  std::cout << fmt::format("threads {}\n", corpus_threads());
  std::cout << "kernel,n,serial_ms,parallel_ms,speedup\n";
  std::cout << fmt::format("match_corpus,{},{:.2f},{:.2f},{:.2f}\n", docs_n, ms_match_serial, ms_match_parallel,
                           ms_match_serial / ms_match_parallel);
  std::cout << fmt::format("profile_corpus,{},{:.2f},{:.2f},{:.2f}\n", regex_n, ms_profile_serial, ms_profile_parallel,
                           ms_profile_serial / ms_profile_parallel);
  if (serial_hits != parallel_hits) {
    std::cerr << "match counts differ: " << serial_hits << " vs " << parallel_hits << "\n";
    return 1;
  }
  return 0;
}
