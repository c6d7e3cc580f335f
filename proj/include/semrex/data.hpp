#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semrex/lang.hpp"

namespace semrex {

struct FeatureRef {
  std::string model_id;
  std::string source_id;
  std::uint64_t feature_index = 0;

  /// "model/source/index"
  std::string key() const;
  friend bool operator==(const FeatureRef&, const FeatureRef&) = default;
  friend auto operator<=>(const FeatureRef&, const FeatureRef&) = default;
};

/// One document's tokens and per-token activations for one feature.
struct ActivationRecord {
  std::vector<std::string> tokens;  // verbatim, including leading spaces
  std::vector<double> activations;
  std::size_t max_index = 0;  // argmax over non-BOS tokens, first on ties
  bool has_bos = false;       // tokens[0] is a beginning-of-sequence marker

  /// Index of the first token that counts for activation statistics.
  std::size_t first_content() const { return has_bos ? 1 : 0; }
  double max_activation() const;
  bool is_bos(std::size_t i) const { return has_bos && i == 0; }

  std::string text() const;
  /// Character range of each token in text().
  std::vector<CharSpan> token_offsets() const;

  friend bool operator==(const ActivationRecord&, const ActivationRecord&) = default;
};

struct FeatureDataset {
  FeatureRef feature;
  std::vector<ActivationRecord> records;
  double feature_max = 0.0;

  /// Records ordered by max activation, highest first; ties keep record order.
  std::vector<const ActivationRecord*> ranked() const;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FeatureNotFound : public DataError {
 public:
  explicit FeatureNotFound(FeatureRef ref);
  FeatureRef ref;
};

class SchemaError : public DataError {
 public:
  SchemaError(const std::string& what, std::vector<std::string> missing_fields = {});
  std::vector<std::string> missing_fields;
};

/// Tokens treated as beginning-of-sequence markers when they appear first.
bool is_bos_token(std::string_view token);

/// Builds a validated record; computes max_index and flags a leading BOS.
/// Throws SchemaError on length mismatch, empty input, or negative values.
ActivationRecord make_record(std::vector<std::string> tokens, std::vector<double> activations);

/// Parses one feature document: either `{"activations": [record, ...]}` or a
/// bare array of records, each with `tokens` and `values` (and optionally
/// `maxValue`).
FeatureDataset parse_feature_document(std::string_view json, const FeatureRef& ref);

/// Parses JSON lines, one record object per line.
FeatureDataset parse_feature_jsonl(std::string_view jsonl, const FeatureRef& ref);

// ---------------------------------------------------------------------------
// Sources

class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual FeatureDataset load(const FeatureRef& ref) const = 0;
  virtual std::string id() const = 0;
};

/// Reads `<root>/<model>/<source>/<index>.jsonl`.
class LocalFileSource : public FeatureSource {
 public:
  explicit LocalFileSource(std::filesystem::path root) : root_(std::move(root)) {}
  FeatureDataset load(const FeatureRef& ref) const override;
  std::string id() const override { return "local:" + root_.string(); }
  std::filesystem::path path_for(const FeatureRef& ref) const;

 private:
  std::filesystem::path root_;
};

struct RemoteSourceConfig {
  std::string base_url;
  std::string path_template = "{model}/{source}/{index}";
  std::string api_key_env = "NEURONPEDIA_API_KEY";
  std::string api_key_header = "x-api-key";
  std::filesystem::path cache_dir;  // empty disables the on-disk cache
  int max_attempts = 3;
  bool offline = false;  // only serve cached documents
};

/// HTTPS GET of a per-feature activations document, cached on disk by
/// (model, source, index). A 404 raises FeatureNotFound.
class RemoteSource : public FeatureSource {
 public:
  explicit RemoteSource(RemoteSourceConfig config);
  FeatureDataset load(const FeatureRef& ref) const override;
  std::string id() const override { return "remote:" + config_.base_url; }
  std::string path_for(const FeatureRef& ref) const;

 private:
  RemoteSourceConfig config_;
};

struct IngestResult {
  FeatureRef ref;
  std::optional<FeatureDataset> dataset;
  std::string error;
};

/// Loads features with at most `max_in_flight` concurrent loads. Results are
/// in the order of `refs`; failures are reported per feature.
std::vector<IngestResult> ingest_features(const FeatureSource& source, const std::vector<FeatureRef>& refs,
                                          std::size_t max_in_flight = 8);

// ---------------------------------------------------------------------------
// Protocols

/// Sub-record of up to `width` tokens around max_index. The window starts at
/// max_index - width/2 and is shifted inward at a document edge.
ActivationRecord prepare_window(const ActivationRecord& record, std::size_t width);

/// round(10 v / feature_max), half away from zero, clamped to [0, 10]. BOS
/// tokens scale to 0.
std::vector<int> scale_activations(const ActivationRecord& record, double feature_max);

/// Tokens with activation strictly above threshold_fraction * feature_max. BOS tokens never qualify.
std::vector<bool> above_threshold(const ActivationRecord& record, double threshold_fraction, double feature_max);

/// Concatenates tokens verbatim, wrapping each maximal run of marked tokens in `<<` `>>`.
std::string format_highlighted(const std::vector<std::string>& tokens, const std::vector<bool>& marked);

std::string highlight_text(const ActivationRecord& record, double threshold_fraction, double feature_max);

/// Applies the highlight pattern of positives[ordinal % positives.size()] to
/// the negative's tokens, clipping indices beyond its length.
std::string transfer_highlights(const std::vector<ActivationRecord>& positives, const ActivationRecord& negative,
                                double threshold_fraction, double feature_max, std::size_t negative_ordinal);

struct SamplingPlan {
  enum class Scheme { quantile, fade };
  Scheme scheme = Scheme::quantile;
  std::size_t n = 0;
  std::size_t n_quantiles = 10;
  double top_fraction = 0.2;
  std::vector<double> bin_edges = {0, 50, 75, 95, 100};  // percent of feature_max

  static SamplingPlan quantile(std::size_t n, std::size_t n_quantiles);
  static SamplingPlan fade(std::size_t n, double top_fraction, std::vector<double> bin_edges = {0, 50, 75, 95, 100});
  /// Empty when the plan is valid.
  std::string validate() const;
};

struct SampleResult {
  std::vector<ActivationRecord> records;
  bool saturated = false;  // n exceeded the dataset; every record returned
};

SampleResult sample_examples(const FeatureDataset& dataset, const SamplingPlan& plan, std::uint64_t seed);

/// Uniform draw without replacement over records of features other than `exclude`.
std::vector<ActivationRecord> sample_negatives(const std::vector<FeatureDataset>& pool, const FeatureRef& exclude,
                                               std::size_t n, std::uint64_t seed);

/// Splits per-bin quotas across bins, moving any shortfall to the nearest
/// bins that still have spare items (lower index first on equal distance).
std::vector<std::size_t> allocate_with_borrowing(const std::vector<std::size_t>& quotas,
                                                 const std::vector<std::size_t>& available);

}  // namespace semrex
