#include "semrex/data.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"
#include "semrex/fsutil.hpp"
#include "semrex/http.hpp"
#include "semrex/rng.hpp"
#include "semrex/text.hpp"

namespace semrex {

using nlohmann::json;

std::string FeatureRef::key() const { return fmt::format("{}/{}/{}", model_id, source_id, feature_index); }

double ActivationRecord::max_activation() const {
  return activations.empty() ? 0.0 : activations[max_index];
}

std::string ActivationRecord::text() const {
  std::string out;
  for (const auto& t : tokens) out += t;
  return out;
}

std::vector<CharSpan> ActivationRecord::token_offsets() const {
  std::vector<CharSpan> out;
  out.reserve(tokens.size());
  std::size_t pos = 0;
  for (const auto& t : tokens) {
    out.push_back({pos, pos + t.size()});
    pos += t.size();
  }
  return out;
}

std::vector<const ActivationRecord*> FeatureDataset::ranked() const {
  std::vector<const ActivationRecord*> out;
  for (const auto& r : records) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto* a, const auto* b) { return a->max_activation() > b->max_activation(); });
  return out;
}

FeatureNotFound::FeatureNotFound(FeatureRef r) : DataError("feature not found: " + r.key()), ref(std::move(r)) {}

SchemaError::SchemaError(const std::string& what, std::vector<std::string> missing)
    : DataError(what), missing_fields(std::move(missing)) {}

bool is_bos_token(std::string_view token) {
  return token == "<bos>" || token == "<|endoftext|>" || token == "<s>" || token == "<BOS>";
}

ActivationRecord make_record(std::vector<std::string> tokens, std::vector<double> activations) {
  if (tokens.size() != activations.size()) {
    throw SchemaError(
        fmt::format("record has {} tokens but {} activation values", tokens.size(), activations.size()));
  }
  if (tokens.empty()) throw SchemaError("record has no tokens");
  for (double v : activations) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw SchemaError(fmt::format("invalid activation value {}", v));
  }
  ActivationRecord r;
  r.has_bos = is_bos_token(tokens.front()) && tokens.size() > 1;
  r.tokens = std::move(tokens);
  r.activations = std::move(activations);
  r.max_index = r.first_content();
  for (std::size_t i = r.first_content(); i < r.activations.size(); ++i) {
    if (r.activations[i] > r.activations[r.max_index]) r.max_index = i;
  }
  return r;
}

namespace {

ActivationRecord record_from_json(const json& j, std::size_t ordinal) {
  if (!j.is_object()) throw SchemaError(fmt::format("record {} is not an object", ordinal));
  std::vector<std::string> missing;
  for (const char* field : {"tokens", "values"}) {
    if (!j.contains(field)) missing.emplace_back(field);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw SchemaError(fmt::format("record {} is missing fields: {}", ordinal, list), missing);
  }
  try {
    return make_record(j.at("tokens").get<std::vector<std::string>>(), j.at("values").get<std::vector<double>>());
  } catch (const SchemaError& e) {
    throw SchemaError(fmt::format("record {}: {}", ordinal, e.what()));
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("record {}: {}", ordinal, e.what()));
  }
}

FeatureDataset finish_dataset(const FeatureRef& ref, std::vector<ActivationRecord> records,
                              double declared_max) {
  if (records.empty()) throw SchemaError("feature " + ref.key() + " has no activation records");
  FeatureDataset ds{ref, std::move(records), declared_max};
  for (const auto& r : ds.records) ds.feature_max = std::max(ds.feature_max, r.max_activation());
  if (!(ds.feature_max > 0)) throw SchemaError("feature " + ref.key() + " never activates");
  return ds;
}

double declared_max_of(const json& j) {
  if (j.is_object() && j.contains("maxValue") && j["maxValue"].is_number()) return j["maxValue"].get<double>();
  return 0.0;
}

}  // namespace

FeatureDataset parse_feature_document(std::string_view text, const FeatureRef& ref) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("malformed feature document for " + ref.key() + ": " + e.what());
  }
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("activations")) {
      throw SchemaError("feature document for " + ref.key() + " is missing fields: activations", {"activations"});
    }
    list = &doc["activations"];
  }
  if (!list->is_array()) throw SchemaError("activations of " + ref.key() + " is not an array");
  std::vector<ActivationRecord> records;
  double declared = 0.0;
  for (std::size_t i = 0; i < list->size(); ++i) {
    records.push_back(record_from_json((*list)[i], i));
    declared = std::max(declared, declared_max_of((*list)[i]));
  }
  return finish_dataset(ref, std::move(records), declared);
}

FeatureDataset parse_feature_jsonl(std::string_view jsonl, const FeatureRef& ref) {
  std::vector<ActivationRecord> records;
  double declared = 0.0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    std::string_view line = jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? jsonl.size() : nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(fmt::format("{} line {}: {}", ref.key(), line_no, e.what()));
    }
    records.push_back(record_from_json(j, records.size()));
    declared = std::max(declared, declared_max_of(j));
  }
  return finish_dataset(ref, std::move(records), declared);
}

// ---------------------------------------------------------------------------


std::filesystem::path LocalFileSource::path_for(const FeatureRef& ref) const {
  return root_ / ref.model_id / ref.source_id / (std::to_string(ref.feature_index) + ".jsonl");
}

FeatureDataset LocalFileSource::load(const FeatureRef& ref) const {
  auto p = path_for(ref);
  if (!std::filesystem::exists(p)) throw FeatureNotFound(ref);
  try {
    return parse_feature_jsonl(read_file(p), ref);
  } catch (const SchemaError& e) {
    throw SchemaError(p.string() + ": " + e.what(), e.missing_fields);
  } catch (const DataError& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

RemoteSource::RemoteSource(RemoteSourceConfig config) : config_(std::move(config)) {}

std::string RemoteSource::path_for(const FeatureRef& ref) const {
  std::string p = text::replace_all(config_.path_template, "{model}", ref.model_id);
  p = text::replace_all(p, "{source}", ref.source_id);
  return text::replace_all(p, "{index}", std::to_string(ref.feature_index));
}

FeatureDataset RemoteSource::load(const FeatureRef& ref) const {
  std::filesystem::path cached;
  if (!config_.cache_dir.empty()) {
    cached = config_.cache_dir / "activations" / ref.model_id / ref.source_id /
             (std::to_string(ref.feature_index) + ".json");
    if (std::filesystem::exists(cached)) return parse_feature_document(read_file(cached), ref);
  }
  if (config_.offline) throw DataError("offline and no cached activations for " + ref.key());
  HttpHeaders headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace_back(config_.api_key_header, key);
    }
  }
  HttpClient client(config_.base_url);
  HttpResponse resp;
  for (int attempt = 1;; ++attempt) {
    resp = client.get(path_for(ref), headers);
    bool transient = resp.status == 0 || resp.status == 429 || resp.status >= 500;
    if (!transient || attempt >= config_.max_attempts) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(100) * (1 << (attempt - 1)));
  }
  if (resp.status == 404) throw FeatureNotFound(ref);
  if (!resp.ok()) {
    throw DataError(fmt::format("fetching {} from {} failed: {}", ref.key(), config_.base_url,
                                resp.status ? "HTTP " + std::to_string(resp.status) : resp.error));
  }
  FeatureDataset ds = parse_feature_document(resp.body, ref);
  if (!cached.empty()) write_atomically(cached, resp.body);
  return ds;
}

std::vector<IngestResult> ingest_features(const FeatureSource& source, const std::vector<FeatureRef>& refs,
                                          std::size_t max_in_flight) {
  std::vector<IngestResult> results(refs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < refs.size(); i = next++) {
      results[i].ref = refs[i];
      try {
        results[i].dataset = source.load(refs[i]);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  std::size_t n_threads = std::max<std::size_t>(1, std::min(max_in_flight, refs.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return results;
}

// ---------------------------------------------------------------------------

ActivationRecord prepare_window(const ActivationRecord& record, std::size_t width) {
  if (width == 0) throw std::invalid_argument("window width must be at least 1");
  const std::size_t n = record.tokens.size();
  if (n <= width) return record;
  std::size_t start = record.max_index > width / 2 ? record.max_index - width / 2 : 0;
  start = std::min(start, n - width);
  ActivationRecord w;
  w.tokens.assign(record.tokens.begin() + static_cast<std::ptrdiff_t>(start),
                  record.tokens.begin() + static_cast<std::ptrdiff_t>(start + width));
  w.activations.assign(record.activations.begin() + static_cast<std::ptrdiff_t>(start),
                       record.activations.begin() + static_cast<std::ptrdiff_t>(start + width));
  w.has_bos = record.has_bos && start == 0;
  w.max_index = record.max_index - start;
  return w;
}

std::vector<int> scale_activations(const ActivationRecord& record, double feature_max) {
  if (!(feature_max > 0)) throw std::invalid_argument("feature_max must be positive");
  std::vector<int> out(record.activations.size(), 0);
  for (std::size_t i = record.first_content(); i < out.size(); ++i) {
    long v = std::lround(10.0 * record.activations[i] / feature_max);
    out[i] = static_cast<int>(std::clamp(v, 0L, 10L));
  }
  return out;
}

std::vector<bool> above_threshold(const ActivationRecord& record, double threshold_fraction, double feature_max) {
  std::vector<bool> out(record.activations.size(), false);
  const double cut = threshold_fraction * feature_max;
  for (std::size_t i = record.first_content(); i < out.size(); ++i) out[i] = record.activations[i] > cut;
  return out;
}

std::string format_highlighted(const std::vector<std::string>& tokens, const std::vector<bool>& marked) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    bool on = i < marked.size() && marked[i];
    bool prev = i > 0 && i - 1 < marked.size() && marked[i - 1];
    bool next = i + 1 < tokens.size() && i + 1 < marked.size() && marked[i + 1];
    if (on && !prev) out += "<<";
    out += tokens[i];
    if (on && !next) out += ">>";
  }
  return out;
}

std::string highlight_text(const ActivationRecord& record, double threshold_fraction, double feature_max) {
  return format_highlighted(record.tokens, above_threshold(record, threshold_fraction, feature_max));
}

std::string transfer_highlights(const std::vector<ActivationRecord>& positives, const ActivationRecord& negative,
                                double threshold_fraction, double feature_max, std::size_t negative_ordinal) {
  if (positives.empty()) throw std::invalid_argument("transfer_highlights needs at least one positive");
  const auto& source = positives[negative_ordinal % positives.size()];
  std::vector<bool> pattern = above_threshold(source, threshold_fraction, feature_max);
  pattern.resize(negative.tokens.size(), false);
  if (negative.has_bos && !pattern.empty()) pattern[0] = false;
  return format_highlighted(negative.tokens, pattern);
}

// ---------------------------------------------------------------------------

SamplingPlan SamplingPlan::quantile(std::size_t n, std::size_t n_quantiles) {
  SamplingPlan p;
  p.scheme = Scheme::quantile;
  p.n = n;
  p.n_quantiles = n_quantiles;
  return p;
}

SamplingPlan SamplingPlan::fade(std::size_t n, double top_fraction, std::vector<double> bin_edges) {
  SamplingPlan p;
  p.scheme = Scheme::fade;
  p.n = n;
  p.top_fraction = top_fraction;
  p.bin_edges = std::move(bin_edges);
  return p;
}

std::string SamplingPlan::validate() const {
  if (scheme == Scheme::quantile) return n_quantiles >= 1 ? "" : "n_quantiles must be at least 1";
  if (!(top_fraction >= 0 && top_fraction <= 1)) return "top_fraction must lie in [0, 1]";
  if (bin_edges.size() < 2 || bin_edges.front() != 0 || bin_edges.back() != 100) {
    return "fade bins must partition [0, 100]";
  }
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) return "fade bin edges must increase";
  }
  return {};
}

std::vector<std::size_t> allocate_with_borrowing(const std::vector<std::size_t>& quotas,
                                                 const std::vector<std::size_t>& available) {
  const std::size_t k = quotas.size();
  std::vector<std::size_t> take(k);
  for (std::size_t b = 0; b < k; ++b) take[b] = std::min(quotas[b], available[b]);
  // Move each bin's shortfall to the nearest bins with spare items.
  for (std::size_t b = 0; b < k; ++b) {
    std::size_t missing = quotas[b] - std::min(quotas[b], available[b]);
    for (std::size_t d = 1; missing > 0 && d < k; ++d) {
      for (std::ptrdiff_t c : {static_cast<std::ptrdiff_t>(b) - static_cast<std::ptrdiff_t>(d),
                               static_cast<std::ptrdiff_t>(b + d)}) {
        if (c < 0 || c >= static_cast<std::ptrdiff_t>(k) || missing == 0) continue;
        std::size_t spare = available[c] - take[c];
        std::size_t moved = std::min(spare, missing);
        take[c] += moved;
        missing -= moved;
      }
    }
  }
  return take;
}

namespace {

// Equal split of n over k bins; the first n % k bins get one extra.
std::vector<std::size_t> even_quotas(std::size_t n, std::size_t k) {
  std::vector<std::size_t> q(k, n / k);
  for (std::size_t b = 0; b < n % k; ++b) ++q[b];
  return q;
}

void draw_from_bins(const std::vector<std::vector<const ActivationRecord*>>& bins,
                    const std::vector<std::size_t>& take, Rng& rng, std::vector<ActivationRecord>& out) {
  for (std::size_t b = 0; b < bins.size(); ++b) {
    for (std::size_t idx : rng.sample(bins[b].size(), take[b])) out.push_back(*bins[b][idx]);
  }
}

}  // namespace

SampleResult sample_examples(const FeatureDataset& dataset, const SamplingPlan& plan, std::uint64_t seed) {
  if (dataset.records.empty()) throw std::invalid_argument("cannot sample from an empty dataset");
  if (auto err = plan.validate(); !err.empty()) throw std::invalid_argument(err);
  auto ranked = dataset.ranked();
  SampleResult result;
  if (plan.n >= ranked.size()) {
    for (const auto* r : ranked) result.records.push_back(*r);
    result.saturated = plan.n > ranked.size();
    return result;
  }
  Rng rng(seed);
  if (plan.scheme == SamplingPlan::Scheme::quantile) {
    // Bin 0 holds the highest-ranked records.
    const std::size_t q = plan.n_quantiles;
    std::vector<std::vector<const ActivationRecord*>> bins(q);
    for (std::size_t i = 0; i < ranked.size(); ++i) bins[i * q / ranked.size()].push_back(ranked[i]);
    std::vector<std::size_t> available;
    for (const auto& b : bins) available.push_back(b.size());
    draw_from_bins(bins, allocate_with_borrowing(even_quotas(plan.n, q), available), rng, result.records);
    return result;
  }
  const std::size_t n_top = static_cast<std::size_t>(std::lround(plan.top_fraction * static_cast<double>(plan.n)));
  for (std::size_t i = 0; i < n_top; ++i) result.records.push_back(*ranked[i]);
  // Remaining records binned by peak activation as a percentage of feature_max;
  // bins are listed from the highest percentile down so borrowing prefers stronger examples.
  const std::size_t k = plan.bin_edges.size() - 1;
  std::vector<std::vector<const ActivationRecord*>> bins(k);
  for (std::size_t i = n_top; i < ranked.size(); ++i) {
    double pct = 100.0 * ranked[i]->max_activation() / dataset.feature_max;
    std::size_t bin = 0;
    for (std::size_t b = 0; b < k; ++b) {
      if (pct >= plan.bin_edges[k - 1 - b]) {
        bin = b;
        break;
      }
    }
    bins[bin].push_back(ranked[i]);
  }
  std::vector<std::size_t> available;
  for (const auto& b : bins) available.push_back(b.size());
  draw_from_bins(bins, allocate_with_borrowing(even_quotas(plan.n - n_top, k), available), rng, result.records);
  return result;
}

std::vector<ActivationRecord> sample_negatives(const std::vector<FeatureDataset>& pool, const FeatureRef& exclude,
                                               std::size_t n, std::uint64_t seed) {
  std::vector<const ActivationRecord*> candidates;
  for (const auto& ds : pool) {
    if (ds.feature == exclude) continue;
    for (const auto& r : ds.records) candidates.push_back(&r);
  }
  if (candidates.size() < n) {
    throw DataError(fmt::format("negative pool has {} records but {} were requested (short by {})",
                                candidates.size(), n, n - candidates.size()));
  }
  Rng rng(seed);
  std::vector<ActivationRecord> out;
  for (std::size_t idx : rng.sample(candidates.size(), n)) out.push_back(*candidates[idx]);
  return out;
}

}  // namespace semrex
