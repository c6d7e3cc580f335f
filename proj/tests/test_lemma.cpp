#include <string>

#include "doctest.h"
#include "semrex/lemma.hpp"
#include "support.hpp"

using semrex::default_lemma;

TEST_CASE("lemma: documented examples") {
  CHECK(default_lemma("running") == "run");
  CHECK(default_lemma("ran") == "run");
  CHECK(default_lemma("color") == "color");
  CHECK(default_lemma("faster") == "fast");
  CHECK(default_lemma("Colors") == "color");
  CHECK(default_lemma("it's") == "it's");
}

TEST_CASE("lemma: gold table") {
  auto rows = test_support::read_tsv("lemma_gold.tsv");
  CHECK(rows.size() >= 200);
  int mismatches = 0;
  for (const auto& row : rows) {
    REQUIRE(row.size() == 2);
    std::string got = default_lemma(row[0]);
    if (got != row[1]) {
      ++mismatches;
      MESSAGE(row[0] << " -> " << got << " (gold " << row[1] << ")");
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("lemma: idempotent on the gold table and its outputs") {
  for (const auto& row : test_support::read_tsv("lemma_gold.tsv")) {
    std::string once = default_lemma(row[0]);
    CAPTURE(row[0]);
    CHECK(default_lemma(once) == once);
  }
}

TEST_CASE("lemma: idempotent on synthetic inflections") {
  const char* stems[] = {"walk", "hope", "stop", "try", "box", "sing", "free", "agree", "panel", "visit",
                         "bus", "quiz", "echo", "study", "fix", "plan", "code", "see", "need", "dye"};
  const char* suffixes[] = {"", "s", "es", "ed", "d", "ing", "er", "est", "ies", "ied"};
  for (const char* s : stems) {
    for (const char* x : suffixes) {
      std::string w = std::string(s) + x;
      std::string once = default_lemma(w);
      CAPTURE(w);
      CHECK(default_lemma(once) == once);
    }
  }
}
