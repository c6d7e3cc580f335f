#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "semrex/data.hpp"
#include "semrex/decimal.hpp"
#include "semrex/describe.hpp"
#include "semrex/metrics.hpp"

namespace semrex {

/// Invalid or unresolvable job configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FeatureSelection {
  std::string model;
  std::string source;
  int layer = 0;
  std::vector<std::uint64_t> indices;  // explicit indices, or
  std::uint64_t range_begin = 0;       // `sample` distinct indices from [begin, end)
  std::uint64_t range_end = 0;
  std::size_t sample = 0;
};

struct ResolvedFeature {
  FeatureRef ref;
  int layer = 0;
  std::size_t ordinal = 0;  // position in the resolved list; seeds derive from it
};

struct SampleCounts {
  std::size_t n_positive = 50;
  std::size_t n_negative = 50;
};

struct MetricSettings {
  EvaluatorConfig detection = EvaluatorConfig::defaults(MetricId::detection);
  EvaluatorConfig fuzzing = EvaluatorConfig::defaults(MetricId::fuzzing);
  EvaluatorConfig rating = EvaluatorConfig::defaults(MetricId::responsiveness);
  SampleCounts detection_counts, fuzzing_counts, rating_counts;
  std::size_t n_quantiles = 10;
  double top_fraction = 0.2;
  std::vector<double> percentile_bins = {0, 50, 75, 95, 100};
  std::optional<double> fuzzing_threshold;  // default: the description method's threshold
  ClarityConfig clarity;
  FaithfulnessConfig faithfulness;
};

struct ProviderConfig {
  std::string type;  // explainer: scripted | remote; evaluator: label | scripted | remote
  nlohmann::json settings = nlohmann::json::object();
};

struct BackendConfig {
  nlohmann::json activation = {{"type", "none"}};
  nlohmann::json steering = {{"type", "none"}};
};

struct ConsistencyConfig {
  std::size_t samples = 0;  // descriptions per feature and method; 0 disables
  std::size_t pool = 0;     // top records to resample from; 0 means 2 * n_examples
};

struct JobConfig {
  std::uint64_t seed = 0;
  std::vector<std::string> stages = {"describe", "evaluate", "analyze"};
  nlohmann::json data;  // {"type": "local", "root": ...} or {"type": "remote", ...}
  std::vector<FeatureSelection> features;
  std::vector<MethodSpec> methods;
  std::vector<MetricId> metrics;
  MetricSettings metric_settings;
  ProviderConfig explainer;
  ProviderConfig evaluator;
  BackendConfig backend;
  ConsistencyConfig consistency;
  double noninferiority_margin = 0.05;
  Decimal price_in = Decimal::parse("0.00000015");
  Decimal price_out = Decimal::parse("0.0000006");
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path out_dir = "out";
  std::size_t workers = 4;
  bool offline = false;

  /// The config as loaded, with paths resolved; hashed into the manifest.
  nlohmann::json source;

  bool has_stage(std::string_view s) const;
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Unset values take the published defaults (`"defaults": "paper"`).
JobConfig parse_job_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
JobConfig load_job_config(const std::filesystem::path& path);

/// Feature list in selection order. Range samples draw from the job seed.
std::vector<ResolvedFeature> resolve_features(const JobConfig& config);

struct JobSummary {
  std::size_t features = 0;
  std::size_t failed = 0;
  std::size_t provider_failures = 0;
  int exit_code = 0;  // 0 ok, 3 provider error, 4 partial
  std::filesystem::path out_dir;
};

/// Runs the configured stages and writes manifest.json, results.jsonl and the
/// analysis CSVs to out_dir. Everything except the manifest's timings is
/// reproduced byte for byte when rerun against the same cache.
JobSummary run_job(const JobConfig& config);

// ---------------------------------------------------------------------------
// Analysis over results files.

struct AnalysisOutputs {
  std::string complexity_by_layer;
  std::string consistency;
  std::string lengths;
  std::string costs;
  std::string significance;
};

/// CSV reports from parsed results.jsonl lines.
AnalysisOutputs analyze_results(const std::vector<nlohmann::json>& results, const JobConfig& config);
std::vector<nlohmann::json> read_results(const std::filesystem::path& path);
void write_analysis(const AnalysisOutputs& outputs, const std::filesystem::path& out_dir);

}  // namespace semrex
