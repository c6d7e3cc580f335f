#include "semrex/corpus.hpp"

#include <exception>

#include <omp.h>

namespace semrex {

namespace {

// Exceptions must not leave an OpenMP region; the first one is kept and
// rethrown after the loop.
class FirstError {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(semrex_first_error)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

ProfileOutcome profile_one(const std::string& text) {
  ProfileOutcome out;
  try {
    out.profile = complexity_profile(parse(text));
  } catch (const ParseError& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<std::vector<MatchSpan>> match_corpus_serial(const RegexNode& regex,
                                                        const std::vector<WordSequence>& docs,
                                                        const OracleBundle& oracles, MatchOptions options) {
  std::vector<std::vector<MatchSpan>> out(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out[i] = find_matches(regex, docs[i], oracles, options);
  return out;
}

std::vector<std::vector<MatchSpan>> match_corpus(const RegexNode& regex, const std::vector<WordSequence>& docs,
                                                 const OracleBundle& oracles, MatchOptions options) {
  std::vector<std::vector<MatchSpan>> out(docs.size());
  FirstError error;
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    error.run([&] { out[i] = find_matches(regex, docs[i], oracles, options); });
  }
  error.rethrow();
  return out;
}

std::vector<ProfileOutcome> profile_corpus_serial(const std::vector<std::string>& regexes) {
  std::vector<ProfileOutcome> out(regexes.size());
  for (std::size_t i = 0; i < regexes.size(); ++i) out[i] = profile_one(regexes[i]);
  return out;
}

std::vector<ProfileOutcome> profile_corpus(const std::vector<std::string>& regexes) {
  std::vector<ProfileOutcome> out(regexes.size());
  FirstError error;
  const auto n = static_cast<std::ptrdiff_t>(regexes.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    error.run([&] { out[i] = profile_one(regexes[i]); });
  }
  error.rethrow();
  return out;
}

int corpus_threads() { return omp_get_max_threads(); }

}  // namespace semrex
