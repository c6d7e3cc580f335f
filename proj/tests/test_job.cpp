#include <filesystem>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "semrex/job.hpp"
#include "support.hpp"

using namespace semrex;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json demo_config() { return json::parse(test_support::read_file(std::string(SEMREX_DEMO) + "/config.json")); }

JobConfig parse_demo(const json& j) { return parse_job_config(j, SEMREX_DEMO); }

/// A scratch directory removed on scope exit.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("semrex-job-" + name + "-" + std::to_string(::getpid()))) {
    fs::remove_all(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

json with_dirs(json j, const Scratch& s) {
  j["cache_dir"] = (s.dir / "cache").string();
  j["out_dir"] = (s.dir / "out").string();
  return j;
}

}  // namespace

TEST_CASE("parse_job_config: the demo config") {
  auto c = parse_demo(demo_config());
  CHECK(c.seed == 7);
  CHECK(c.methods.size() == 3);
  CHECK(c.metrics.size() == 6);
  CHECK(c.metric_settings.detection_counts.n_positive == 10);
  CHECK(c.metric_settings.clarity.generation_calls == 4);
  CHECK(c.consistency.samples == 3);
  CHECK(c.workers == 2);
  CHECK(c.cache_dir == fs::path(SEMREX_DEMO) / "cache");
  CHECK(c.price_in == Decimal::parse("0.15e-6"));
}

TEST_CASE("parse_job_config: defaults and implied stages") {
  json j = {{"data", {{"type", "local"}, {"root", "features"}}},
            {"features", {{{"model", "demo"}, {"source", "layer0"}, {"indices", {0}}}}},
            {"explainer", {{"type", "scripted"}, {"rules", json::array()}}},
            {"evaluator", {{"type", "label"}}},
            {"stages", {"evaluate"}}};
  auto c = parse_demo(j);
  CHECK(c.stages == std::vector<std::string>{"describe", "evaluate"});
  REQUIRE(c.methods.size() == 1);
  CHECK(c.methods[0].method == Method::semantic_regex);
  CHECK(c.noninferiority_margin == 0.05);
  CHECK(c.workers == 4);
  CHECK_FALSE(c.offline);
}

TEST_CASE("parse_job_config: errors") {
  auto rejects = [](json j) { CHECK_THROWS_AS(parse_demo(j), ConfigError); };
  json base = demo_config();
  json j = base;
  j["colour"] = 1;
  rejects(j);
  j = base;
  j["defaults"] = "other";
  rejects(j);
  j = base;
  j["stages"] = {"describe", "publish"};
  rejects(j);
  j = base;
  j.erase("data");
  rejects(j);
  j = base;
  j["methods"] = {"semantic-regex", "word-cloud"};
  rejects(j);
  j = base;
  j["backend"]["activation"] = {{"type", "none"}};
  rejects(j);  // clarity needs activations
  j = base;
  j["backend"]["steering"] = {{"type", "none"}};
  rejects(j);  // faithfulness needs steering
  j = base;
  j["evaluator"]["policy"] = "sometimes";
  rejects(j);
  j = base;
  j["consistency"]["samples"] = 1;
  rejects(j);
  j = base;
  j["pricing"] = {{"input", "cheap"}};
  rejects(j);
  CHECK_THROWS_AS(load_job_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("resolve_features: explicit indices then a seeded range sample") {
  auto c = parse_demo(demo_config());
  auto a = resolve_features(c);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].ordinal == i);
  CHECK(a[0].ref.key() == "demo/layer0/0");
  CHECK(a[3].layer == 1);
  auto b = resolve_features(c);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].ref.key() == b[i].ref.key());

  json j = demo_config();
  j["features"][1]["range"] = {0, 100};
  j["features"][1]["sample"] = 5;
  auto wide = resolve_features(parse_demo(j));
  REQUIRE(wide.size() == 8);
  for (std::size_t i = 4; i < 8; ++i) CHECK(wide[i - 1].ref.feature_index < wide[i].ref.feature_index);
  CHECK(wide.back().ref.feature_index < 100);
}

TEST_CASE("run_job: an all-positive evaluator scores at chance without failing") {
  Scratch s("positive");
  json j = with_dirs(demo_config(), s);
  j["evaluator"]["policy"] = "all-positive";
  j["stages"] = {"describe", "evaluate"};
  auto summary = run_job(parse_demo(j));
  CHECK(summary.exit_code == 0);
  CHECK(summary.failed == 0);
  for (const auto& row : read_results(s.dir / "out" / "results.jsonl")) {
    CHECK(row["status"] == "ok");
    for (const auto& d : row["descriptions"]) {
      CHECK(d["metrics"]["detection"]["score"] == 0.5);
      CHECK(d["metrics"]["fuzzing"]["score"] == 0.5);
      // Constant ratings do not rank positives above negatives.
      CHECK(d["metrics"]["responsiveness"]["score"] == 0.0);
    }
  }
  CHECK_FALSE(fs::exists(s.dir / "out" / "costs.csv"));
}

TEST_CASE("run_job: provider errors") {
  Scratch s("provider");
  json j = with_dirs(demo_config(), s);
  j["stages"] = {"describe"};
  j["explainer"]["rules"] = json::array();
  auto summary = run_job(parse_demo(j));
  CHECK(summary.exit_code == 3);
  CHECK(summary.provider_failures == 6);
  auto rows = read_results(s.dir / "out" / "results.jsonl");
  REQUIRE(rows.size() == 6);
  CHECK(rows[0]["status"] == "failed");

  // One feature still answered: partial.
  j = with_dirs(demo_config(), s);
  j["stages"] = {"describe"};
  json kept = json::array();
  json all_rules = demo_config()["explainer"]["rules"];
  for (const auto& r : all_rules) {
    if (r["contains"] == "forever") kept.push_back(r);
  }
  j["explainer"]["rules"] = kept;
  summary = run_job(parse_demo(j));
  CHECK(summary.exit_code == 4);
  CHECK(summary.failed == 5);
}

TEST_CASE("run_job: offline replay of a remote explainer needs the cache") {
  Scratch s("offline");
  json j = with_dirs(demo_config(), s);
  j["stages"] = {"describe"};
  j["explainer"] = {{"type", "remote"}, {"base_url", "http://127.0.0.1:9"}};
  j["offline"] = true;
  auto summary = run_job(parse_demo(j));
  CHECK(summary.exit_code == 3);
  auto manifest = json::parse(test_support::read_file((s.dir / "out" / "manifest.json").string()));
  CHECK(manifest["offline"] == true);
  CHECK(manifest["exit_code"] == 3);
}

TEST_CASE("run_job: seed override changes feature seeds but not the selection of explicit indices") {
  Scratch s("seed");
  json j = with_dirs(demo_config(), s);
  j["stages"] = {"describe"};
  run_job(parse_demo(j));
  auto m7 = json::parse(test_support::read_file((s.dir / "out" / "manifest.json").string()));
  j["seed"] = 8;
  run_job(parse_demo(j));
  auto m8 = json::parse(test_support::read_file((s.dir / "out" / "manifest.json").string()));
  CHECK(m7["feature_seeds"] != m8["feature_seeds"]);
  CHECK(m7["config_hash"] != m8["config_hash"]);
  CHECK(m7["feature_seeds"].size() == 6);
}
