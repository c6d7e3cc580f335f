#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semrex/analysis.hpp"
#include "semrex/decimal.hpp"
#include "semrex/stats.hpp"
#include "support.hpp"

using namespace semrex;

TEST_CASE("Decimal: parse, arithmetic, formatting") {
  CHECK(Decimal::parse("0.15e-6").to_string() == "0.00000015");
  CHECK(Decimal::parse("1.5E+3").to_string() == "1500");
  CHECK(Decimal::parse("-0.20").to_string() == "-0.2");
  CHECK((Decimal::parse("0.1") + Decimal::parse("0.2")) == Decimal::parse("0.3"));
  CHECK((Decimal::parse("0.1") * Decimal::parse("0.1")).to_string() == "0.01");
  CHECK(Decimal::parse("0.0002118").to_fixed(8) == "0.00021180");
  CHECK(Decimal::parse("0.125").to_fixed(2) == "0.13");
  CHECK(Decimal::parse("-0.125").to_fixed(2) == "-0.13");
  CHECK(Decimal(0).to_fixed(3) == "0.000");
  CHECK(Decimal::parse("2") > Decimal::parse("1.99"));
  CHECK_THROWS(Decimal::parse("abc"));
  CHECK_THROWS(Decimal::parse("1.2.3"));
  CHECK_THROWS(Decimal::parse("1e"));
}

TEST_CASE("cost_per_feature reproduces the three per-method costs exactly") {
  const Decimal p_in = Decimal::parse("0.15e-6"), p_out = Decimal::parse("0.60e-6");
  CHECK(cost_per_feature({p_in, p_out, 919, 457, 9}) == Decimal::parse("0.00021180"));
  CHECK(cost_per_feature({p_in, p_out, 483, 524, 30}) == Decimal::parse("0.00016905"));
  CHECK(cost_per_feature({p_in, p_out, 993, 237, 33}) == Decimal::parse("0.00020430"));
  CHECK(cost_per_feature({p_in, p_out, 993, 237, 33}).to_fixed(8) == "0.00020430");
  CHECK(cost_per_feature({}) == Decimal(0));
}

TEST_CASE("property: cost is linear in every field") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    CostModel a{Decimal::parse(std::to_string(rng() % 1000) + "e-9"), Decimal::parse(std::to_string(rng() % 1000) + "e-9"),
                static_cast<std::int64_t>(rng() % 5000), static_cast<std::int64_t>(rng() % 5000),
                static_cast<std::int64_t>(rng() % 500)};
    CostModel b = a;
    b.t_prompt += 17;
    CHECK(cost_per_feature(b) - cost_per_feature(a) == a.p_in * Decimal(17));
    b = a;
    b.t_out += 5;
    CHECK(cost_per_feature(b) - cost_per_feature(a) == a.p_out * Decimal(5));
    b = a;
    b.p_in = a.p_in + a.p_in;
    CHECK(cost_per_feature(b) - cost_per_feature(a) == a.p_in * Decimal(a.t_prompt + a.t_feature));
  }
}

TEST_CASE("complexity_profile: documented examples") {
  auto p = complexity_profile(parse("[:symbol 54:]"));
  CHECK(p.n_components == 1);
  CHECK(p.structure == StructureClass::single_primitive);
  CHECK(p.depth == 1);
  p = complexity_profile(parse("@{:context journalism:}([:lexeme cover:])"));
  CHECK(p.n_components == 2);
  CHECK(p.contexts == 1);
  CHECK(p.lexemes == 1);
  CHECK(p.structure == StructureClass::contextual);
  p = complexity_profile(parse("[:field political title:] [:field last name:]"));
  CHECK(p.n_components == 2);
  CHECK(p.structure == StructureClass::sequence);
  CHECK(complexity_profile(parse("[:symbol a:]?")).structure == StructureClass::optional);
}

TEST_CASE("complexity_profile on the listing regex corpus") {
  for (const auto& row : test_support::read_tsv("listing_regexes.tsv")) {
    CAPTURE(row[0]);
    auto node = parse(row[0], ParseOptions{.lenient = row[1] == "1"});
    auto p = complexity_profile(node);
    CHECK(p.n_components == std::stoul(row[2]));
    CHECK(to_string(p.structure) == row[3]);
    CHECK(p.symbols == std::stoul(row[4]));
    CHECK(p.lexemes == std::stoul(row[5]));
    CHECK(p.fields == std::stoul(row[6]));
    CHECK(p.contexts == std::stoul(row[7]));
    // Invariant under round trip.
    auto q = complexity_profile(parse(render(node)));
    CHECK(q.n_components == p.n_components);
    CHECK(q.structure == p.structure);
  }
}

TEST_CASE("property: complexity is invariant under alternation reordering") {
  auto a = parse("[:symbol a:] [:field b:]|@{:context c:}([:lexeme d:])|[:symbol e:]?");
  auto b = a;
  std::reverse(b.children.begin(), b.children.end());
  auto pa = complexity_profile(a), pb = complexity_profile(b);
  CHECK(pa.n_components == pb.n_components);
  CHECK(pa.structure == pb.structure);
  CHECK(pa.symbols == pb.symbols);
  CHECK(pa.depth == pb.depth);
}

TEST_CASE("layer_summary") {
  auto single = complexity_profile(parse("[:symbol a:]"));
  auto pair = complexity_profile(parse("[:symbol a:] [:lexeme b:]"));
  auto rows = layer_summary({{0, {single, single, pair, pair}}});
  CHECK(rows[0].mean_components == 1.5);
  CHECK(rows[0].prop_single_primitive == 0.5);
  CHECK(rows[0].prop_symbol == 4.0 / 6);
  rows = layer_summary({{3, {single, single}}, {1, {pair}}});
  CHECK(rows[0].layer == 1);
  CHECK(rows[1].prop_single_primitive == 1.0);
  CHECK(rows[1].prop_sequence == 0.0);
  CHECK_THROWS(layer_summary({{0, {}}}));
  std::string csv = complexity_csv(rows);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "layer,mean_components,prop_single_primitive,prop_sequence,prop_alternation,prop_optional,"
        "prop_contextual,prop_symbol,prop_lexeme,prop_field,prop_context");
  CHECK(csv.find("\n3,1,1,0,0,0,0,1,0,0,0\n") != std::string::npos);
}

TEST_CASE("consistency_rate") {
  CHECK(consistency_rate(std::vector<std::string>(5, "A")) == 1.0);
  CHECK(consistency_rate(std::vector<std::string>{"A", "B", "C", "D", "E"}) == 0.0);
  CHECK(consistency_rate(std::vector<std::string>{"A", "A", "A", "B", "B"}) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(modal_consistency({"A", "A", "A", "B", "B"}) == 0.6);
  CHECK_THROWS(consistency_rate(std::vector<std::string>{"A"}));

  // Semantic regexes compare by canonical form; text compares whitespace-normalized.
  Description d1{{}, Method::semantic_regex, "", "[:symbol a:]  [:symbol b:]", parse("[:symbol a:][:symbol b:]")};
  Description d2{{}, Method::semantic_regex, "", "([:symbol a:] [:symbol b:])", parse("([:symbol a:] [:symbol b:])")};
  CHECK(consistency_rate(std::vector<Description>{d1, d2}) == 1.0);
  Description t1{{}, Method::max_acts, "", "The  word x"}, t2{{}, Method::max_acts, "", "the word x"};
  CHECK(consistency_rate(std::vector<Description>{t1, t1}) == 1.0);
  CHECK(consistency_rate(std::vector<Description>{t1, t2}) == 0.0);
}

TEST_CASE("property: consistency is permutation invariant and in [0,1]") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> forms;
    std::size_t n = 2 + rng() % 10;
    for (std::size_t k = 0; k < n; ++k) forms.push_back(std::string(1, static_cast<char>('A' + rng() % 3)));
    double r = consistency_rate(forms);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    std::shuffle(forms.begin(), forms.end(), rng);
    CHECK(consistency_rate(forms) == r);
    bool all_equal = std::all_of(forms.begin(), forms.end(), [&](const auto& f) { return f == forms[0]; });
    CHECK((r == 1.0) == all_equal);
  }
}

TEST_CASE("length_stats") {
  auto s = length_stats_of({10, 20, 30});
  CHECK(s.median == 20);
  CHECK(s.q1 == 15);
  CHECK(s.q3 == 25);
  s = length_stats_of({7});
  CHECK(s.median == 7);
  CHECK(s.q3 - s.q1 == 0);
  Description d{{}, Method::max_acts, "", "héllo"};
  CHECK(length_stats({d}).median == 5);
}

TEST_CASE("student_t_upper: mpmath reference table and closed-form series") {
  for (const auto& row : test_support::read_tsv("t_upper_tail.tsv")) {
    int df = std::stoi(row[0]);
    double t = std::stod(row[1]), ref = std::stod(row[2]);
    CAPTURE(df);
    CAPTURE(t);
    double got = stats::student_t_upper(t, df);
    CHECK(std::fabs(got - ref) < 5e-7);  // six decimals
    CHECK(std::fabs(got - ref) <= 1e-12 * std::max(1.0, ref) + 1e-15);
    CHECK(std::fabs(got - test_support::t_upper_series(t, df)) < 1e-12);
  }
}

TEST_CASE("noninferiority") {
  // Identical scores: zero variance and mean(d) + margin > 0.
  std::vector<double> a(100, 0.5);
  auto r = noninferiority_test(a, a, 0.05, 1);
  CHECK(r.zero_variance);
  CHECK(r.p == 0.0);
  CHECK_FALSE(r.flagged);

  // mean(d) = 0 with sd > 0: t = margin / (sd / sqrt(n)).
  std::vector<double> b(100), c(100);
  for (int i = 0; i < 100; ++i) {
    b[i] = 0.5 + (i % 2 ? 0.1 : -0.1);
    c[i] = 0.5;
  }
  r = noninferiority_test(b, c, 0.05, 1);
  double sd = stats::sample_sd([&] {
    std::vector<double> d;
    for (int i = 0; i < 100; ++i) d.push_back(b[i] - c[i]);
    return d;
  }());
  CHECK(r.t == doctest::Approx(0.05 / (sd / 10.0)).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(test_support::t_upper_series(r.t, 99)).epsilon(1e-9));
  CHECK(r.p < 0.05);
  CHECK(noninferiority_p(b, c, 0.05, 3) == doctest::Approx(std::min(1.0, 3 * r.p)));

  // 0.2 below with some noise: deep in H0.
  std::vector<double> lower(50), base(50);
  for (int i = 0; i < 50; ++i) {
    base[i] = 0.6 + 0.01 * (i % 5);
    lower[i] = base[i] - 0.2 + 0.005 * (i % 3);
  }
  CHECK(noninferiority_p(lower, base, 0.05, 1) > 0.999);
  std::vector<double> shifted(50);
  for (int i = 0; i < 50; ++i) shifted[i] = base[i] - 0.2;
  CHECK(noninferiority_p(shifted, base, 0.05, 1) == 1.0);

  // Zero variance exactly on the margin.
  std::vector<double> on_margin(10, 0.45), ref(10, 0.5);
  r = noninferiority_test(on_margin, ref, 0.05, 1);
  CHECK(r.flagged);
  CHECK(r.p == 0.5);

  CHECK_THROWS(noninferiority_test({1, 2}, {1, 2}, 0.05, 1));
  CHECK_THROWS(noninferiority_test({1, 2, 3}, {1, 2}, 0.05, 1));
  CHECK_THROWS(noninferiority_test({1, 2, 3}, {1, 2, 3}, -0.1, 1));
}

TEST_CASE("property: non-inferiority p decreases in margin and in mean difference") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0, 0.1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(30), b(30);
    for (int k = 0; k < 30; ++k) {
      b[k] = 0.5 + noise(rng);
      a[k] = b[k] + noise(rng);
    }
    double prev = 2;
    for (double margin : {0.0, 0.01, 0.05, 0.1, 0.3}) {
      double p = noninferiority_test(a, b, margin, 1).p;
      CHECK(p <= prev);
      prev = p;
    }
    prev = 2;
    for (double shift : {-0.2, -0.05, 0.0, 0.05, 0.2}) {
      std::vector<double> moved = a;
      for (double& x : moved) x += shift;
      double p = noninferiority_test(moved, b, 0.05, 1).p;
      CHECK(p <= prev);
      prev = p;
    }
  }
}

TEST_CASE("quantile uses linear interpolation") {
  CHECK(stats::quantile({1, 2, 3, 4}, 0.25) == 1.75);
  CHECK(stats::quantile({4, 1, 3, 2}, 0.5) == 2.5);
  CHECK(stats::quantile({5}, 0.9) == 5);
  CHECK_THROWS(stats::quantile({}, 0.5));
}
