// Acceptance gate: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "brute_force.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "random_regex.hpp"
#include "semrex/analysis.hpp"
#include "semrex/corpus.hpp"
#include "semrex/data.hpp"
#include "semrex/describe.hpp"
#include "semrex/fsutil.hpp"
#include "semrex/job.hpp"
#include "semrex/lemma.hpp"
#include "semrex/scoring.hpp"
#include "semrex/stats.hpp"
#include "support.hpp"
#include "year_dataset.hpp"

using namespace semrex;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Collects failed checks of one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  int count() const { return count_; }
  int failed() const { return failed_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  int count_ = 0;
  int failed_ = 0;
  std::vector<std::string> failures_;
};

struct Criterion {
  int id;
  std::string name;
  double budget_ms;
  std::function<void(Checks&)> body;
};

bool run_criterion(const Criterion& c) {
  Checks checks;
  auto t0 = std::chrono::steady_clock::now();
  std::string crash;
  try {
    c.body(checks);
  } catch (const std::exception& e) {
    crash = e.what();
  }
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  bool in_time = ms < c.budget_ms;
  bool ok = crash.empty() && checks.failed() == 0 && checks.count() > 0 && in_time;
  std::cout << fmt::format("{} criterion {}: {} ({} checks, {:.3f} ms, budget {} ms)\n", ok ? "PASS" : "FAIL", c.id,
                           c.name, checks.count(), ms, c.budget_ms);
  if (!crash.empty()) std::cout << "    exception: " << crash << "\n";
  if (!in_time) std::cout << "    over the time budget\n";
  for (const auto& f : checks.failures()) std::cout << "    failed: " << f << "\n";
  if (checks.failed() > static_cast<int>(checks.failures().size())) {
    std::cout << fmt::format("    ... {} failures in total\n", checks.failed());
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 1. Cost table

void cost_reproduction(Checks& c) {
  const Decimal p_in = Decimal::parse("0.15e-6"), p_out = Decimal::parse("0.60e-6");
  struct Row {
    std::int64_t t_prompt, t_feature, t_out;
    const char* expected;
  };
  const Row rows[] = {{919, 457, 9, "0.00021180"}, {483, 524, 30, "0.00016905"}, {993, 237, 33, "0.00020430"}};
  for (const auto& r : rows) {
    Decimal got = cost_per_feature({p_in, p_out, r.t_prompt, r.t_feature, r.t_out});
    c.expect(got == Decimal::parse(r.expected), fmt::format("{} != {}", got.to_string(), r.expected));
    c.expect(got.to_fixed(8) == r.expected, got.to_fixed(8));
  }
}

// ---------------------------------------------------------------------------
// 2. Language fixtures

void language_fixtures(Checks& c) {
  auto rows = test_support::read_tsv("listing_regexes.tsv");
  c.expect(rows.size() >= 25, fmt::format("only {} regexes", rows.size()));
  for (const auto& row : rows) {
    RegexNode n = parse(row[0], ParseOptions{.lenient = row[1] == "1"});
    std::string canonical = render(n);
    c.expect(parse(canonical) == n && render(parse(canonical)) == canonical, "round trip: " + row[0]);
    c.expect(validate(n).empty(), "validate: " + row[0]);
    auto p = complexity_profile(n);
    bool counts = p.n_components == std::stoul(row[2]) && to_string(p.structure) == row[3] &&
                  p.symbols == std::stoul(row[4]) && p.lexemes == std::stoul(row[5]) &&
                  p.fields == std::stoul(row[6]) && p.contexts == std::stoul(row[7]);
    c.expect(counts, "complexity: " + row[0]);
  }
  auto oracles = default_oracles();
  for (const auto& ex : test_support::language_examples()) {
    c.expect(test_support::language_example_holds(ex, oracles), ex.regex + " on \"" + ex.marked + "\"");
  }
}

// ---------------------------------------------------------------------------
// 3. Matcher against the brute-force enumerator

OracleBundle small_oracles() {
  OracleBundle b;
  b.lexical = [](std::string_view w) { return default_lemma(w); };
  b.field = wordlist_field_oracle(
      parse_gazetteer("color\tred\ncolor\tblue\ncolor\tdark red\nrun\tjog\nrun\trun\nrun\tgo for a run\nthe\tthe a\n"));
  b.context = keyword_context_oracle(parse_gazetteer("sport\tjog\npaint\tred\nthe\tthe\n"));
  return b;
}

WordSequence random_doc(std::mt19937_64& rng) {
  static const std::vector<std::string> vocab = {"run",  "runs",  "ran",  "running", "fast", "faster", "very",
                                                 "the",  "a",     "jog",  "red",     "blue", "dark",   "go",
                                                 "for",  "times", "the.", "Run",     "un",   "walked"};
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string text;
  int n = len(rng);
  for (int i = 0; i < n; ++i) text += (i ? " " : "") + vocab[pick(rng)];
  return WordSequence::from_text(text);
}

void matcher_equivalence(Checks& c) {
  auto oracles = small_oracles();
  test_support::RegexGenerator gen(2718,
                                   {"run", "fast", "the", "a", "un", "e", "color", "run fast", "times the", "ing",
                                    "the a", "go for"},
                                   {"sport", "paint", "the", "none"});
  std::mt19937_64 rng(31415);
  int instances = 0;
  while (instances < 1000) {
    RegexNode regex = gen.generate(6, 4);
    if (test_support::count_nodes(regex) > 6) continue;
    WordSequence doc = random_doc(rng);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& s : find_matches(regex, doc, oracles)) got.insert({s.start_word, s.end_word});
    test_support::BruteForceMatcher brute(doc, oracles);
    c.expect(got == brute.all_spans(regex), render(regex) + " on \"" + doc.text + "\"");
    ++instances;
  }
}

// ---------------------------------------------------------------------------
// 4. Scoring math

void scoring_oracles(Checks& c) {
  std::mt19937_64 rng(4242);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    std::size_t n = 2 + rng() % 40;
    int levels = 1 + static_cast<int>(rng() % 6);
    std::vector<LabeledScore> s = {{true, double(rng() % levels)}, {false, double(rng() % levels)}};
    for (std::size_t k = 2; k < n; ++k) s.push_back({rng() % 2 == 0, double(rng() % levels)});
    std::shuffle(s.begin(), s.end(), rng);
    worst = std::max(worst, std::fabs(gini_from_scores(s) - (2 * test_support::pairwise_auc(s) - 1)));
  }
  c.expect(worst <= 1e-12, fmt::format("gini worst error {}", worst));

  // Random fixtures of up to 8 examples over 3 score levels.
  for (int i = 0; i < 2000; ++i) {
    std::size_t n = 1 + rng() % 8;
    std::vector<LabeledScore> s;
    for (std::size_t k = 0; k < n; ++k) s.push_back({rng() % 2 == 0, double(rng() % 3)});
    s[rng() % n].positive = true;
    double got = average_precision(s), want = test_support::exhaustive_tie_ap(s);
    c.expect(std::fabs(got - want) <= 1e-12, fmt::format("AP {} vs {}", got, want));
  }

  auto ba = [](std::vector<int> labels, std::vector<int> preds) {
    std::vector<BinaryJudgment> j;
    for (std::size_t i = 0; i < labels.size(); ++i) j.push_back({labels[i] == 1, preds[i] == 1});
    return balanced_accuracy(j);
  };
  // (TP, FN, TN, FP) read off by hand.
  c.expect(ba({1, 1, 0, 0}, {1, 1, 0, 0}) == 1.0, "BA perfect");
  c.expect(ba({1, 1, 0, 0}, {1, 0, 0, 0}) == 0.75, "BA TP1 FN1 TN2");
  c.expect(ba({1, 1, 0, 0}, {1, 1, 1, 1}) == 0.5, "BA all positive");
  c.expect(ba({1, 1, 1, 0, 0, 0, 0, 0}, {1, 1, 0, 1, 1, 0, 1, 1}) == (2.0 / 3 + 1.0 / 5) / 2, "BA TP2 FN1 TN1 FP4");
  c.expect(ba({1, 0, 0, 0}, {0, 1, 1, 1}) == 0.0, "BA inverted");

  std::set<int> dfs;
  for (const auto& row : test_support::read_tsv("t_upper_tail.tsv")) {
    int df = std::stoi(row[0]);
    double t = std::stod(row[1]), ref = std::stod(row[2]);
    dfs.insert(df);
    double got = stats::student_t_upper(t, df);
    c.expect(std::fabs(got - ref) < 5e-7, fmt::format("t upper df {} t {}: {} vs {}", df, t, got, ref));
  }
  c.expect(dfs == std::set<int>{5, 30, 99}, "reference table degrees of freedom");

  // The p-value from paired samples matches the independent t statistic.
  for (int df : {5, 30, 99}) {
    for (int rep = 0; rep < 20; ++rep) {
      std::normal_distribution<double> noise(0.0, 0.05);
      std::vector<double> a, b, d;
      for (int k = 0; k <= df; ++k) {
        b.push_back(0.7 + noise(rng));
        a.push_back(b.back() - 0.04 + noise(rng));
        d.push_back(a.back() - b.back());
      }
      double mean = 0;
      for (double x : d) mean += x;
      mean /= d.size();
      double ss = 0;
      for (double x : d) ss += (x - mean) * (x - mean);
      double sd = std::sqrt(ss / (d.size() - 1));
      double t = (mean + 0.05) / (sd / std::sqrt(double(d.size())));
      double want = test_support::t_upper_series(t, df);
      double got = noninferiority_p(a, b, 0.05, 1);
      c.expect(std::fabs(got - want) < 5e-7, fmt::format("non-inferiority df {}: {} vs {}", df, got, want));
    }
  }
}

// ---------------------------------------------------------------------------
// 5. Formatting golden files

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t at = s.find(sep, start);
    out.push_back(s.substr(start, at == std::string::npos ? std::string::npos : at - start));
    if (at == std::string::npos) return out;
    start = at + 1;
  }
}

std::string unescape_newlines(std::string s) {
  for (std::size_t at = s.find("\\n"); at != std::string::npos; at = s.find("\\n", at + 1)) s.replace(at, 2, "\n");
  return s;
}

void formatting_golden(Checks& c) {
  for (const auto& row : test_support::read_tsv("highlight_examples.tsv")) {
    std::vector<std::string> tokens;
    for (const auto& t : split(row[1], '|')) tokens.push_back(unescape_newlines(t));
    std::vector<double> values;
    for (const auto& v : split(row[2], ',')) values.push_back(std::stod(v));
    std::string golden = unescape_newlines(row[0]);
    std::string got = highlight_text(make_record(tokens, values), 0.3, 10.0);
    c.expect(got == golden, "highlight: " + golden + " got " + got);
  }
  auto ds = test_support::year_dataset();
  const std::pair<Method, const char*> goldens[] = {{Method::token_act_pair, "describe_token_act_pair.json"},
                                                    {Method::max_acts, "describe_max_acts.json"},
                                                    {Method::semantic_regex, "describe_semantic_regex.json"}};
  for (const auto& [method, file] : goldens) {
    std::string got = to_json(build_messages(MethodSpec::defaults(method), ds)).dump(2) + "\n";
    std::string want = test_support::read_file((fs::path(SEMREX_GOLDEN) / file).string());
    c.expect(got == want, std::string("prompt golden ") + file);
  }
}

// ---------------------------------------------------------------------------
// 6. Closed-loop pipeline

struct RunOutputs {
  std::vector<json> rows;
  std::map<std::string, std::string> files;
  int exit_code = 0;
};

const char* const kReportFiles[] = {"results.jsonl",   "complexity_by_layer.csv", "consistency.csv",
                                    "lengths.csv",     "costs.csv",               "significance.csv"};

RunOutputs run_demo(const fs::path& work, const std::string& out, const std::string& policy, json activation) {
  fs::path demo = SEMREX_DEMO;
  json j = json::parse(test_support::read_file((demo / "config.json").string()));
  j["cache_dir"] = (work / "cache").string();
  j["out_dir"] = (work / out).string();
  j["evaluator"]["policy"] = policy;
  j["backend"]["activation"] = std::move(activation);
  JobSummary s = run_job(parse_job_config(j, demo));
  RunOutputs r;
  r.exit_code = s.exit_code;
  r.rows = read_results(work / out / "results.jsonl");
  for (const char* f : kReportFiles) r.files[f] = test_support::read_file((work / out / f).string());
  return r;
}

/// Scores of one metric over every description of every feature.
std::vector<double> scores(const RunOutputs& r, const std::string& metric) {
  std::vector<double> out;
  for (const auto& row : r.rows) {
    for (const auto& d : row["descriptions"]) {
      const auto& m = d["metrics"];
      if (!m.contains(metric) || !m[metric].contains("score") || !m[metric]["score"].is_number()) {
        out.push_back(std::nan(""));
      } else {
        out.push_back(m[metric]["score"].get<double>());
      }
    }
  }
  return out;
}

void expect_all(Checks& c, const RunOutputs& r, const std::string& metric, double want, const std::string& scenario) {
  auto s = scores(r, metric);
  c.expect(s.size() == 18, fmt::format("{}: {} {} scores", scenario, s.size(), metric));
  for (double x : s) c.expect(x == want, fmt::format("{}: {} = {} (want {})", scenario, metric, x, want));
}

void closed_loop(Checks& c) {
  fs::path work = fs::temp_directory_path() / fmt::format("semrex-acceptance-{}", ::getpid());
  fs::remove_all(work);
  json keyword = {{"type", "keyword"}, {"weights", {{"volcano", 5.0}}}};
  json constant = {{"type", "constant"}, {"value", 1.0}};

  auto oracle = run_demo(work, "oracle", "oracle", keyword);
  c.expect(oracle.exit_code == 0, fmt::format("oracle run exit {}", oracle.exit_code));
  for (const char* m : {"detection", "fuzzing", "responsiveness", "purity", "clarity"}) {
    expect_all(c, oracle, m, 1.0, "oracle/keyword");
  }

  auto rerun = run_demo(work, "oracle", "oracle", keyword);
  for (const char* f : kReportFiles) c.expect(rerun.files[f] == oracle.files[f], std::string("rerun differs: ") + f);

  auto positive = run_demo(work, "positive", "all-positive", constant);
  expect_all(c, positive, "detection", 0.5, "all-positive");
  expect_all(c, positive, "fuzzing", 0.5, "all-positive");
  expect_all(c, positive, "clarity", 0.0, "constant backend");
  fs::remove_all(work);
}

// ---------------------------------------------------------------------------
// 7. Complexity trend

void complexity_trend(Checks& c) {
  test_support::RegexGenerator gen(17, {"run", "color", "1954", "cover", "political title"}, {"politics"});
  std::vector<std::string> layer0, layer1;
  for (int i = 0; i < 200; ++i) {
    layer0.push_back(render(gen.generate(1, 1)));
    layer1.push_back(render(RegexNode::sequence({gen.generate(1, 1), gen.generate(1, 1)})));
  }
  std::map<int, std::vector<ComplexityProfile>> by_layer;
  for (auto [layer, regexes] : {std::pair{0, &layer0}, std::pair{1, &layer1}}) {
    for (const auto& o : profile_corpus(*regexes)) {
      c.expect(o.profile.has_value(), "profile: " + o.error);
      if (o.profile) by_layer[layer].push_back(*o.profile);
    }
  }
  auto rows = layer_summary(by_layer);
  c.expect(rows.size() == 2, "two layers");
  if (rows.size() != 2) return;
  c.expect(rows[0].mean_components == 1.0, fmt::format("layer 0 mean {}", rows[0].mean_components));
  c.expect(rows[1].mean_components == 2.0, fmt::format("layer 1 mean {}", rows[1].mean_components));
  c.expect(rows[0].prop_single_primitive == 1.0, "layer 0 single primitives");
  c.expect(rows[1].prop_single_primitive == 0.0, "layer 1 single primitives");
  c.expect(rows[1].prop_sequence == 1.0, "layer 1 sequences");
}

// ---------------------------------------------------------------------------
// 8. Consistency estimator

void consistency_fixtures(Checks& c) {
  c.expect(consistency_rate(std::vector<std::string>(5, "A")) == 1.0, "identical");
  c.expect(consistency_rate(std::vector<std::string>{"A", "B", "C", "D", "E"}) == 0.0, "all distinct");
  double mixed = consistency_rate(std::vector<std::string>{"A", "A", "A", "B", "B"});
  c.expect(std::fabs(mixed - 0.4) < 1e-15, fmt::format("AAABB = {}", mixed));
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "cost reproduction", 1, cost_reproduction},
      {2, "language fixtures", 1000, language_fixtures},
      {3, "matcher oracle equivalence", 30000, matcher_equivalence},
      {4, "scoring math oracles", 60000, scoring_oracles},
      {5, "formatting golden files", 1000, formatting_golden},
      {6, "closed-loop pipeline", 60000, closed_loop},
      {7, "complexity trend harness", 1000, complexity_trend},
      {8, "consistency estimator", 1000, consistency_fixtures},
  };
  int failed = 0;
  for (const auto& c : criteria) failed += run_criterion(c) ? 0 : 1;
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed;
}
