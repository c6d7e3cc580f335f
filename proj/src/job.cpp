#include "semrex/job.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "semrex/analysis.hpp"
#include "semrex/backend.hpp"
#include "semrex/fsutil.hpp"
#include "semrex/hash.hpp"
#include "semrex/llm.hpp"
#include "semrex/parallel.hpp"
#include "semrex/prompts.hpp"
#include "semrex/rng.hpp"
#include "semrex/scoring.hpp"
#include "semrex/text.hpp"

namespace semrex {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config reading helpers. Every failure names the offending key.

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(fmt::format("config: {}: {}", where, what));
}

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) bad(where, fmt::format("unknown key '{}'", key));
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    bad(where + "." + key, fmt::format("unexpected value {}", j[key].dump()));
  }
}

std::size_t get_count(const json& j, const std::string& key, const std::string& where, std::size_t fallback,
                      std::size_t minimum = 1) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<std::int64_t>() < static_cast<std::int64_t>(minimum)) {
    bad(where + "." + key, fmt::format("expected an integer >= {}", minimum));
  }
  return j[key].get<std::size_t>();
}

double get_fraction(const json& j, const std::string& key, const std::string& where, double fallback) {
  double v = get<double>(j, key, where, fallback);
  if (!(v >= 0 && v <= 1)) bad(where + "." + key, "expected a value in [0, 1]");
  return v;
}

void apply_evaluator_overrides(EvaluatorConfig& c, const json& j, const std::string& where) {
  c.examples_per_call = get_count(j, "examples_per_call", where, c.examples_per_call);
  c.tokens_per_example = get_count(j, "tokens_per_example", where, c.tokens_per_example);
  c.temperature = get<double>(j, "temperature", where, c.temperature);
  c.top_p = get<double>(j, "top_p", where, c.top_p);
  if (j.contains("max_tokens")) {
    c.max_tokens = j["max_tokens"].is_null() ? std::nullopt
                                             : std::optional<int>(static_cast<int>(get_count(j, "max_tokens", where, 1)));
  }
  if (c.temperature < 0 || c.top_p < 0) bad(where, "temperature and top_p must be >= 0");
}

void apply_counts(SampleCounts& c, const json& j, const std::string& where) {
  c.n_positive = get_count(j, "n_positive", where, c.n_positive);
  c.n_negative = get_count(j, "n_negative", where, c.n_negative);
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

void parse_metrics(JobConfig& c, const json& j) {
  std::vector<std::pair<std::string, json>> entries;
  if (j.is_array()) {
    for (const auto& m : j) {
      if (!m.is_string()) bad("metrics", "expected metric names");
      entries.emplace_back(m.get<std::string>(), json::object());
    }
  } else if (j.is_object()) {
    for (const auto& [name, overrides] : j.items()) entries.emplace_back(name, overrides);
  } else {
    bad("metrics", "expected a list of names or an object of overrides");
  }
  auto& s = c.metric_settings;
  for (const auto& [name, o] : entries) {
    MetricId id;
    try {
      id = parse_metric(name);
    } catch (const std::invalid_argument& e) {
      bad("metrics", e.what());
    }
    c.metrics.push_back(id);
    const std::string where = "metrics." + name;
    switch (id) {
      case MetricId::detection:
      case MetricId::fuzzing: {
        check_keys(o, where,
                   {"n_positive", "n_negative", "n_quantiles", "examples_per_call", "tokens_per_example",
                    "temperature", "top_p", "max_tokens", "threshold"});
        auto& ec = id == MetricId::detection ? s.detection : s.fuzzing;
        auto& counts = id == MetricId::detection ? s.detection_counts : s.fuzzing_counts;
        apply_evaluator_overrides(ec, o, where);
        apply_counts(counts, o, where);
        s.n_quantiles = get_count(o, "n_quantiles", where, s.n_quantiles);
        if (o.contains("threshold")) s.fuzzing_threshold = get_fraction(o, "threshold", where, 0.0);
        break;
      }
      case MetricId::responsiveness:
      case MetricId::purity:
        check_keys(o, where,
                   {"n_positive", "n_negative", "top_fraction", "percentiles", "examples_per_call",
                    "tokens_per_example", "temperature", "top_p", "max_tokens"});
        apply_evaluator_overrides(s.rating, o, where);
        apply_counts(s.rating_counts, o, where);
        s.top_fraction = get_fraction(o, "top_fraction", where, s.top_fraction);
        s.percentile_bins = get<std::vector<double>>(o, "percentiles", where, s.percentile_bins);
        break;
      case MetricId::clarity:
        check_keys(o, where,
                   {"generation_calls", "sequences_per_call", "tokens_per_example", "temperature", "top_p",
                    "max_tokens"});
        apply_evaluator_overrides(s.clarity.evaluator, o, where);
        s.clarity.generation_calls = get_count(o, "generation_calls", where, s.clarity.generation_calls);
        s.clarity.sequences_per_call = get_count(o, "sequences_per_call", where, s.clarity.sequences_per_call);
        break;
      case MetricId::faithfulness: {
        check_keys(o, where,
                   {"factors", "n_prompts", "n_tokens", "aggregation", "examples_per_call", "tokens_per_example",
                    "temperature", "top_p", "max_tokens"});
        apply_evaluator_overrides(s.faithfulness.evaluator, o, where);
        s.faithfulness.factors = get<std::vector<double>>(o, "factors", where, s.faithfulness.factors);
        if (std::find(s.faithfulness.factors.begin(), s.faithfulness.factors.end(), 0.0) == s.faithfulness.factors.end()) {
          bad(where + ".factors", "must include 0 (ablation)");
        }
        s.faithfulness.n_prompts = get_count(o, "n_prompts", where, s.faithfulness.n_prompts);
        s.faithfulness.n_tokens = get_count(o, "n_tokens", where, s.faithfulness.n_tokens);
        std::string agg = get<std::string>(o, "aggregation", where, "difference");
        if (agg != "difference" && agg != "ratio") bad(where + ".aggregation", "expected 'difference' or 'ratio'");
        s.faithfulness.ratio = agg == "ratio";
        break;
      }
    }
  }
  std::sort(c.metrics.begin(), c.metrics.end());
  c.metrics.erase(std::unique(c.metrics.begin(), c.metrics.end()), c.metrics.end());
  if (auto err = SamplingPlan::fade(1, s.top_fraction, s.percentile_bins).validate(); !err.empty()) {
    bad("metrics.percentiles", err);
  }
}

void parse_methods(JobConfig& c, const json& j, const std::string& explainer_model) {
  std::vector<std::pair<std::string, json>> entries;
  if (j.is_array()) {
    for (const auto& m : j) {
      if (!m.is_string()) bad("methods", "expected method names");
      entries.emplace_back(m.get<std::string>(), json::object());
    }
  } else if (j.is_object()) {
    for (const auto& [name, overrides] : j.items()) entries.emplace_back(name, overrides);
  } else {
    bad("methods", "expected a list of names or an object of overrides");
  }
  for (const auto& [name, o] : entries) {
    const std::string where = "methods." + name;
    Method m;
    try {
      m = parse_method(name);
    } catch (const std::invalid_argument& e) {
      bad("methods", e.what());
    }
    check_keys(o, where,
               {"n_fewshot", "n_examples", "tokens_per_example", "temperature", "top_p", "activation_threshold",
                "model"});
    MethodSpec spec = MethodSpec::defaults(m);
    spec.model = explainer_model;
    spec.n_fewshot = get_count(o, "n_fewshot", where, spec.n_fewshot, 0);
    spec.n_examples = get_count(o, "n_examples", where, spec.n_examples);
    spec.tokens_per_example = get_count(o, "tokens_per_example", where, spec.tokens_per_example);
    spec.temperature = get<double>(o, "temperature", where, spec.temperature);
    spec.top_p = get<double>(o, "top_p", where, spec.top_p);
    spec.model = get<std::string>(o, "model", where, spec.model);
    if (o.contains("activation_threshold")) {
      spec.activation_threshold =
          o["activation_threshold"].is_null() ? std::nullopt
                                              : std::optional<double>(get_fraction(o, "activation_threshold", where, 0));
    }
    if (auto err = spec.validate(); !err.empty()) bad(where, err);
    c.methods.push_back(spec);
  }
}

void parse_features(JobConfig& c, const json& j) {
  if (!j.is_array() || j.empty()) bad("features", "expected a non-empty list of selections");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& f = j[i];
    const std::string where = fmt::format("features[{}]", i);
    check_keys(f, where, {"model", "source", "layer", "indices", "range", "sample"});
    FeatureSelection s;
    s.model = get<std::string>(f, "model", where, "");
    s.source = get<std::string>(f, "source", where, "");
    if (s.model.empty() || s.source.empty()) bad(where, "model and source are required");
    s.layer = get<int>(f, "layer", where, 0);
    s.indices = get<std::vector<std::uint64_t>>(f, "indices", where, {});
    if (f.contains("range")) {
      auto r = get<std::vector<std::uint64_t>>(f, "range", where, {});
      if (r.size() != 2 || r[0] >= r[1]) bad(where + ".range", "expected [begin, end) with begin < end");
      s.range_begin = r[0];
      s.range_end = r[1];
      s.sample = get_count(f, "sample", where, r[1] - r[0]);
      if (s.sample > r[1] - r[0]) bad(where + ".sample", "larger than the range");
    }
    if (s.indices.empty() == (s.range_end == 0)) bad(where, "give either 'indices' or 'range'");
    c.features.push_back(std::move(s));
  }
}

ProviderConfig parse_provider(const json& j, const std::string& where, std::initializer_list<std::string_view> types) {
  if (!j.is_object() || !j.contains("type")) bad(where, "expected an object with a 'type'");
  ProviderConfig p;
  p.type = j["type"].get<std::string>();
  if (std::find(types.begin(), types.end(), p.type) == types.end()) bad(where + ".type", fmt::format("unknown type '{}'", p.type));
  p.settings = j;
  if (p.type == "remote") {
    check_keys(j, where, {"type", "model", "base_url", "path", "api_key_env", "max_attempts", "max_in_flight"});
  } else if (p.type == "scripted") {
    check_keys(j, where, {"type", "model", "rules", "fallback"});
    for (const auto& r : j.value("rules", json::array())) {
      if (!r.is_object() || !r.contains("contains") || !r.contains("reply")) bad(where + ".rules", "expected {contains, reply}");
      check_keys(r, where + ".rules", {"contains", "reply", "method"});
      if (r.contains("method")) {
        try {
          parse_method(r["method"].get<std::string>());
        } catch (const std::exception& e) {
          bad(where + ".rules", e.what());
        }
      }
    }
  } else if (p.type == "label") {
    check_keys(j, where, {"type", "model", "policy", "generated"});
    try {
      parse_judge_policy(j.value("policy", "oracle"));
    } catch (const std::invalid_argument& e) {
      bad(where + ".policy", e.what());
    }
  }
  return p;
}

}  // namespace

bool JobConfig::has_stage(std::string_view s) const {
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

JobConfig parse_job_config(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "top level",
             {"defaults", "seed", "stages", "data", "features", "methods", "metrics", "explainer", "evaluator",
              "backend", "consistency", "analysis", "pricing", "cache_dir", "out_dir", "workers", "offline"});
  if (get<std::string>(j, "defaults", "defaults", "paper") != "paper") bad("defaults", "only 'paper' is defined");
  JobConfig c;
  c.seed = get<std::uint64_t>(j, "seed", "seed", 0);
  c.stages = get<std::vector<std::string>>(j, "stages", "stages", c.stages);
  for (const auto& s : c.stages) {
    if (s != "describe" && s != "evaluate" && s != "consistency" && s != "analyze") bad("stages", fmt::format("unknown stage '{}'", s));
  }
  // Evaluation and consistency need descriptions.
  if ((c.has_stage("evaluate") || c.has_stage("consistency")) && !c.has_stage("describe")) c.stages.insert(c.stages.begin(), "describe");

  if (!j.contains("data")) bad("data", "required");
  c.data = j["data"];
  check_keys(c.data, "data", {"type", "root", "base_url", "path_template", "api_key_env", "api_key_header"});
  std::string data_type = get<std::string>(c.data, "type", "data", "");
  if (data_type == "local") {
    if (!c.data.contains("root")) bad("data.root", "required for local data");
    c.data["root"] = resolve_path(base_dir, c.data["root"].get<std::string>()).string();
  } else if (data_type == "remote") {
    c.data["base_url"] = get<std::string>(c.data, "base_url", "data", env_or("SEMREX_DATA_URL", ""));
    if (c.data["base_url"].get<std::string>().empty()) bad("data.base_url", "required (or set SEMREX_DATA_URL)");
  } else {
    bad("data.type", "expected 'local' or 'remote'");
  }

  if (!j.contains("features")) bad("features", "required");
  parse_features(c, j["features"]);

  c.explainer = parse_provider(j.value("explainer", json{{"type", "remote"}}), "explainer", {"scripted", "remote"});
  c.evaluator = parse_provider(j.value("evaluator", json{{"type", "remote"}}), "evaluator", {"label", "scripted", "remote"});
  const std::string explainer_model = c.explainer.settings.value("model", "gpt-4o-mini");
  parse_methods(c, j.value("methods", json::array({"semantic-regex"})), explainer_model);
  parse_metrics(c, j.value("metrics", json::array()));
  const std::string evaluator_model = c.evaluator.settings.value("model", "gpt-4o-mini");
  for (EvaluatorConfig* e : {&c.metric_settings.detection, &c.metric_settings.fuzzing, &c.metric_settings.rating,
                             &c.metric_settings.clarity.evaluator, &c.metric_settings.faithfulness.evaluator}) {
    e->model = evaluator_model;
  }

  if (j.contains("backend")) {
    check_keys(j["backend"], "backend", {"activation", "steering"});
    c.backend.activation = j["backend"].value("activation", c.backend.activation);
    c.backend.steering = j["backend"].value("steering", c.backend.steering);
  }
  auto check_backend = [](const json& b, const std::string& where, std::initializer_list<std::string_view> types) {
    std::string t = b.value("type", "");
    if (std::find(types.begin(), types.end(), t) == types.end()) bad(where + ".type", fmt::format("unknown type '{}'", t));
  };
  check_backend(c.backend.activation, "backend.activation", {"none", "keyword", "constant", "remote"});
  check_backend(c.backend.steering, "backend.steering", {"none", "keyword", "unavailable", "remote"});
  auto has_metric = [&](MetricId m) { return std::find(c.metrics.begin(), c.metrics.end(), m) != c.metrics.end(); };
  if (has_metric(MetricId::clarity) && c.backend.activation["type"] == "none") {
    bad("backend.activation", "clarity needs an activation backend");
  }
  if (has_metric(MetricId::faithfulness) && c.backend.steering["type"] == "none") {
    bad("backend.steering", "faithfulness needs a steering backend (use 'unavailable' to report it skipped)");
  }

  if (j.contains("consistency")) {
    check_keys(j["consistency"], "consistency", {"samples", "pool"});
    c.consistency.samples = get_count(j["consistency"], "samples", "consistency", 0, 0);
    c.consistency.pool = get_count(j["consistency"], "pool", "consistency", 0, 0);
    if (c.consistency.samples == 1) bad("consistency.samples", "needs at least 2 samples");
  }
  if (j.contains("analysis")) {
    check_keys(j["analysis"], "analysis", {"noninferiority_margin"});
    c.noninferiority_margin = get<double>(j["analysis"], "noninferiority_margin", "analysis", c.noninferiority_margin);
    if (c.noninferiority_margin < 0) bad("analysis.noninferiority_margin", "must be >= 0");
  }
  if (j.contains("pricing")) {
    check_keys(j["pricing"], "pricing", {"input", "output"});
    try {
      c.price_in = Decimal::parse(get<std::string>(j["pricing"], "input", "pricing", c.price_in.to_string()));
      c.price_out = Decimal::parse(get<std::string>(j["pricing"], "output", "pricing", c.price_out.to_string()));
    } catch (const std::invalid_argument& e) {
      bad("pricing", e.what());
    }
  }
  c.cache_dir = resolve_path(base_dir, get<std::string>(j, "cache_dir", "cache_dir", "cache"));
  c.out_dir = resolve_path(base_dir, get<std::string>(j, "out_dir", "out_dir", "out"));
  c.workers = get_count(j, "workers", "workers", c.workers);
  c.offline = get<bool>(j, "offline", "offline", false);
  c.source = j;
  c.source["data"] = c.data;
  return c;
}

JobConfig load_job_config(const std::filesystem::path& path) {
  std::string content;
  try {
    content = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("cannot read config {}: {}", path.string(), e.what()));
  }
  json j;
  try {
    j = json::parse(content);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config {} is not valid JSON: {}", path.string(), e.what()));
  }
  return parse_job_config(j, path.parent_path());
}

std::vector<ResolvedFeature> resolve_features(const JobConfig& config) {
  std::vector<ResolvedFeature> out;
  std::set<std::string> seen;
  for (std::size_t s = 0; s < config.features.size(); ++s) {
    const auto& sel = config.features[s];
    std::vector<std::uint64_t> indices = sel.indices;
    if (indices.empty()) {
      Rng rng(Rng::derive(config.seed, 1'000'000 + s));
      for (std::size_t i : rng.sample(sel.range_end - sel.range_begin, sel.sample)) indices.push_back(sel.range_begin + i);
      std::sort(indices.begin(), indices.end());
    }
    for (auto idx : indices) {
      FeatureRef ref{sel.model, sel.source, idx};
      if (!seen.insert(ref.key()).second) continue;
      out.push_back({ref, sel.layer, out.size()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Running.

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

std::string short_hash(const json& j) { return sha256_hex(j.dump()).substr(0, 16); }

/// A provider-side failure: the model, cache or backend could not answer.
bool is_provider_error(const std::exception& e) {
  return dynamic_cast<const LlmError*>(&e) || dynamic_cast<const CacheMiss*>(&e) ||
         dynamic_cast<const MockMiss*>(&e) || dynamic_cast<const BackendError*>(&e);
}

struct ProviderFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::unique_ptr<FeatureSource> make_source(const JobConfig& c) {
  if (c.data["type"] == "local") return std::make_unique<LocalFileSource>(c.data["root"].get<std::string>());
  RemoteSourceConfig rc;
  rc.base_url = c.data["base_url"].get<std::string>();
  rc.path_template = c.data.value("path_template", rc.path_template);
  rc.api_key_env = c.data.value("api_key_env", rc.api_key_env);
  rc.api_key_header = c.data.value("api_key_header", rc.api_key_header);
  rc.cache_dir = c.cache_dir;
  rc.offline = c.offline;
  return std::make_unique<RemoteSource>(rc);
}

std::shared_ptr<ChatProvider> make_remote_chat(const json& s) {
  RemoteChatConfig rc;
  rc.base_url = s.value("base_url", env_or("SEMREX_CHAT_BASE_URL", rc.base_url));
  rc.path = s.value("path", rc.path);
  rc.api_key_env = s.value("api_key_env", rc.api_key_env);
  rc.max_attempts = s.value("max_attempts", rc.max_attempts);
  rc.max_in_flight = s.value("max_in_flight", rc.max_in_flight);
  return std::make_shared<RemoteChatProvider>(rc);
}

std::shared_ptr<ChatProvider> make_scripted(const json& s) {
  auto p = std::make_shared<ScriptedChatProvider>("scripted");
  for (const auto& r : s.value("rules", json::array())) {
    std::optional<std::string> system;
    if (r.contains("method")) system = prompt_messages(prompt_name(parse_method(r["method"].get<std::string>())))[0].content;
    p->add([needle = r["contains"].get<std::string>(), reply = r["reply"].get<std::string>(),
            system](const ChatRequest& req) -> std::optional<std::string> {
      if (system && (req.messages.empty() || req.messages[0].content != *system)) return std::nullopt;
      if (req.last_user().find(needle) == std::string::npos) return std::nullopt;
      return reply;
    });
  }
  if (s.contains("fallback")) p->fallback(s["fallback"].get<std::string>());
  return p;
}

/// Remote responses are cached directly under cache_dir; mock responses in a
/// directory named after the mock's settings so editing a mock never replays
/// stale answers.
std::filesystem::path chat_cache_dir(const JobConfig& c, const ProviderConfig& p) {
  if (p.type == "remote") return c.cache_dir;
  return c.cache_dir / "mock" / fmt::format("{}-{}", p.type, short_hash(p.settings));
}

std::shared_ptr<ActivationBackend> make_activation(const json& b) {
  const std::string t = b["type"];
  if (t == "keyword") return std::make_shared<KeywordActivationBackend>(b.value("weights", std::map<std::string, double>{}));
  if (t == "constant") return std::make_shared<ConstantActivationBackend>(b.value("value", 1.0));
  if (t == "remote") return std::make_shared<RemoteBackend>(b.value("base_url", env_or("SEMREX_BACKEND_URL", "")));
  return nullptr;
}

/// Steering mocks take their threshold as a multiple of the feature maximum,
/// so they are built per feature.
std::shared_ptr<SteeringBackend> make_steering(const json& b, double feature_max) {
  const std::string t = b["type"];
  if (t == "keyword") {
    return std::make_shared<KeywordSteeringBackend>(b.value("threshold_factor", 1.0) * feature_max,
                                                    b.value("steered", std::string()), b.value("neutral", std::string()));
  }
  if (t == "unavailable") return std::make_shared<UnavailableSteeringBackend>();
  if (t == "remote") return std::make_shared<RemoteBackend>(b.value("base_url", env_or("SEMREX_BACKEND_URL", "")));
  return nullptr;
}

json feature_json(const ResolvedFeature& f) {
  return {{"model", f.ref.model_id}, {"source", f.ref.source_id}, {"index", f.ref.feature_index},
          {"key", f.ref.key()}, {"layer", f.layer}};
}

json dataset_json(const FeatureDataset& d) {
  json records = json::array();
  for (const auto& r : d.records) records.push_back({{"tokens", r.tokens}, {"values", r.activations}});
  return records;
}

json description_json(const Description& d) {
  return {{"method", to_string(d.method)},
          {"raw_output", d.raw_output},
          {"extracted", d.extracted},
          {"canonical", canonical_form(d)},
          {"parsed", d.parsed.has_value()},
          {"diagnostic", d.diagnostic},
          {"request_hash", d.request_hash},
          {"prompt_tokens", d.prompt_tokens},
          {"completion_tokens", d.completion_tokens}};
}

Description description_from_json(const json& j, const FeatureRef& ref) {
  Description d = make_description(ref, parse_method(j.at("method").get<std::string>()), j.at("raw_output").get<std::string>(),
                                   j.at("request_hash").get<std::string>());
  d.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  d.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  return d;
}

// Stream ids for per-feature randomness.
enum Stream : std::uint64_t {
  kDetectionPos = 1,
  kDetectionNeg,
  kRatingPos,
  kRatingNeg,
  kClarityNeg,
  kFaithPrompts,
  kPresentation,
  kConsistency = 100,
};

struct Shared {
  const JobConfig& config;
  const std::vector<FeatureDataset>& pool;
  std::shared_ptr<CachingChatProvider> explainer;
  std::shared_ptr<ChatProvider> evaluator_inner;  // remote/scripted evaluators are shared
  std::filesystem::path evaluator_cache;
  std::shared_ptr<CachingBackend> activation;
  std::filesystem::path backend_cache;

  std::mutex mutex;
  std::set<std::string> consumed;  // relative to cache_dir
  double describe_ms = 0, evaluate_ms = 0, consistency_ms = 0;

  void note_consumed(const std::filesystem::path& dir, const std::vector<std::string>& keys, const char* sub) {
    std::lock_guard lock(mutex);
    for (const auto& k : keys) {
      consumed.insert((std::filesystem::relative(dir, config.cache_dir) / sub / (k + ".json")).generic_string());
    }
  }
  void add_time(double& slot, double ms) {
    std::lock_guard lock(mutex);
    slot += ms;
  }
};

/// Positive and negative samples for one metric family.
struct Samples {
  std::vector<ActivationRecord> positives, negatives;
};

double fuzzing_threshold(const JobConfig& c, const MethodSpec& spec) {
  if (c.metric_settings.fuzzing_threshold) return *c.metric_settings.fuzzing_threshold;
  return spec.activation_threshold.value_or(0.60);
}

json evaluate_description(Shared& sh, const ResolvedFeature& f, const FeatureDataset& ds, const Description& d,
                          const MethodSpec& spec, ChatProvider& evaluator, SteeringBackend* steering,
                          const std::map<Stream, Samples>& samples, std::uint64_t feature_seed, bool& had_error) {
  const auto& ms = sh.config.metric_settings;
  json out = json::object();
  auto has = [&](MetricId m) { return std::find(sh.config.metrics.begin(), sh.config.metrics.end(), m) != sh.config.metrics.end(); };
  auto record_error = [&](MetricId m, const std::exception& e) {
    if (is_provider_error(e)) throw ProviderFailure(fmt::format("{} ({}): {}", to_string(m), to_string(d.method), e.what()));
    out[std::string(to_string(m))] = {{"metric", to_string(m)}, {"error", e.what()}};
    had_error = true;
  };
  const std::uint64_t present_seed = Rng::derive(feature_seed, kPresentation);

  if (has(MetricId::detection) || has(MetricId::fuzzing)) {
    const auto& s = samples.at(kDetectionPos);
    ScoringInput in{d, s.positives, s.negatives, ds.feature_max, present_seed};
    if (has(MetricId::detection)) {
      try {
        out["detection"] = run_detection(evaluator, in, ms.detection).to_json();
      } catch (const std::exception& e) {
        record_error(MetricId::detection, e);
      }
    }
    if (has(MetricId::fuzzing)) {
      try {
        out["fuzzing"] = run_fuzzing(evaluator, in, fuzzing_threshold(sh.config, spec), ms.fuzzing).to_json();
      } catch (const std::exception& e) {
        record_error(MetricId::fuzzing, e);
      }
    }
  }
  if (has(MetricId::responsiveness) || has(MetricId::purity)) {
    const auto& s = samples.at(kRatingPos);
    try {
      auto r = run_rating(evaluator, ScoringInput{d, s.positives, s.negatives, ds.feature_max, present_seed}, ms.rating);
      if (has(MetricId::responsiveness)) out["responsiveness"] = r.responsiveness.to_json();
      if (has(MetricId::purity)) out["purity"] = r.purity.to_json();
    } catch (const std::exception& e) {
      if (has(MetricId::responsiveness)) record_error(MetricId::responsiveness, e);
      if (has(MetricId::purity)) record_error(MetricId::purity, e);
    }
  }
  if (has(MetricId::clarity)) {
    try {
      out["clarity"] = run_clarity(evaluator, *sh.activation, d, samples.at(kClarityNeg).negatives, present_seed,
                                   ms.clarity)
                           .to_json();
    } catch (const std::exception& e) {
      record_error(MetricId::clarity, e);
    }
  }
  if (has(MetricId::faithfulness)) {
    try {
      out["faithfulness"] = run_faithfulness(evaluator, *steering, d, samples.at(kFaithPrompts).negatives,
                                             ds.feature_max, present_seed, ms.faithfulness)
                                .to_json();
    } catch (const std::exception& e) {
      record_error(MetricId::faithfulness, e);
    }
  }
  (void)f;
  return out;
}

std::map<Stream, Samples> draw_samples(Shared& sh, const ResolvedFeature& f, const FeatureDataset& ds,
                                       std::uint64_t feature_seed, std::string& error) {
  const auto& c = sh.config;
  const auto& ms = c.metric_settings;
  auto has = [&](MetricId m) { return std::find(c.metrics.begin(), c.metrics.end(), m) != c.metrics.end(); };
  std::map<Stream, Samples> out;
  auto negatives = [&](std::size_t n, Stream s) {
    return sample_negatives(sh.pool, f.ref, n, Rng::derive(feature_seed, s));
  };
  try {
    if (has(MetricId::detection) || has(MetricId::fuzzing)) {
      // Detection and fuzzing share one sample; the larger requested count wins.
      SampleCounts counts{std::max(ms.detection_counts.n_positive, ms.fuzzing_counts.n_positive),
                          std::max(ms.detection_counts.n_negative, ms.fuzzing_counts.n_negative)};
      if (!has(MetricId::fuzzing)) counts = ms.detection_counts;
      if (!has(MetricId::detection)) counts = ms.fuzzing_counts;
      Samples s;
      s.positives = sample_examples(ds, SamplingPlan::quantile(counts.n_positive, ms.n_quantiles),
                                    Rng::derive(feature_seed, kDetectionPos))
                        .records;
      s.negatives = negatives(counts.n_negative, kDetectionNeg);
      out[kDetectionPos] = std::move(s);
    }
    if (has(MetricId::responsiveness) || has(MetricId::purity)) {
      Samples s;
      s.positives = sample_examples(ds, SamplingPlan::fade(ms.rating_counts.n_positive, ms.top_fraction, ms.percentile_bins),
                                    Rng::derive(feature_seed, kRatingPos))
                        .records;
      s.negatives = negatives(ms.rating_counts.n_negative, kRatingNeg);
      out[kRatingPos] = std::move(s);
    }
    if (has(MetricId::clarity)) {
      Samples s;
      s.negatives = negatives(ms.clarity.generation_calls * ms.clarity.sequences_per_call, kClarityNeg);
      out[kClarityNeg] = std::move(s);
    }
    if (has(MetricId::faithfulness)) {
      Samples s;
      s.negatives = negatives(ms.faithfulness.n_prompts, kFaithPrompts);
      out[kFaithPrompts] = std::move(s);
    }
  } catch (const DataError& e) {
    error = e.what();
    out.clear();
  }
  return out;
}

/// Per-feature label evaluator: ground truth is what this feature's samples
/// say, plus the steering mock's texts and the generated sequences.
std::shared_ptr<ChatProvider> make_label_evaluator(const JobConfig& c, const std::map<Stream, Samples>& samples) {
  const auto& s = c.evaluator.settings;
  auto e = std::make_shared<LabelEvaluator>(parse_judge_policy(s.value("policy", "oracle")),
                                            s.value("generated", std::vector<std::string>{}));
  const auto& ms = c.metric_settings;
  auto add = [&](const std::vector<ActivationRecord>& records, bool positive, std::size_t width) {
    for (const auto& r : records) e->add_truth(prepare_window(r, width).text(), positive);
  };
  // Negatives first so that a text drawn as both keeps its positive label.
  for (const auto& [stream, sample] : samples) {
    std::size_t width = stream == kRatingPos ? ms.rating.tokens_per_example : ms.detection.tokens_per_example;
    add(sample.negatives, false, width);
  }
  for (const auto& [stream, sample] : samples) {
    std::size_t width = stream == kRatingPos ? ms.rating.tokens_per_example : ms.detection.tokens_per_example;
    add(sample.positives, true, width);
  }
  for (const auto& g : s.value("generated", std::vector<std::string>{})) e->add_truth(g, true);
  const auto& steer = c.backend.steering;
  if (steer.value("type", "") == "keyword") {
    e->add_truth(steer.value("neutral", std::string()), false);
    e->add_truth(steer.value("steered", std::string()), true);
  }
  return e;
}

json run_consistency(Shared& sh, const FeatureDataset& ds, std::uint64_t feature_seed) {
  json out = json::array();
  const auto& cc = sh.config.consistency;
  for (std::size_t m = 0; m < sh.config.methods.size(); ++m) {
    const auto& spec = sh.config.methods[m];
    auto ranked = ds.ranked();
    std::size_t pool = std::min(ranked.size(), cc.pool ? cc.pool : 2 * spec.n_examples);
    if (pool < spec.n_examples) {
      out.push_back({{"method", to_string(spec.method)}, {"error", fmt::format("{} records; {} needed", pool, spec.n_examples)}});
      continue;
    }
    std::vector<std::string> forms;
    for (std::size_t s = 0; s < cc.samples; ++s) {
      Rng rng(Rng::derive(feature_seed, kConsistency + m * 1000 + s));
      FeatureDataset sub{ds.feature, {}, ds.feature_max};
      auto picks = rng.sample(pool, spec.n_examples);
      std::sort(picks.begin(), picks.end());
      for (auto i : picks) sub.records.push_back(*ranked[i]);
      ChatRequest req = build_messages(spec, sub);
      req.sample = s;
      auto resp = sh.explainer->complete(req);
      forms.push_back(canonical_form(make_description(ds.feature, spec.method, resp.content, request_hash(req))));
    }
    out.push_back({{"method", to_string(spec.method)},
                   {"n", forms.size()},
                   {"forms", forms},
                   {"pairwise", consistency_rate(forms)},
                   {"modal", modal_consistency(forms)}});
  }
  return out;
}

json process_feature(Shared& sh, const ResolvedFeature& f, const IngestResult& ingest, bool& failed, bool& provider) {
  json row = {{"feature", feature_json(f)}};
  const auto& c = sh.config;
  if (!ingest.dataset) {
    row["status"] = "failed";
    row["error"] = ingest.error;
    failed = true;
    return row;
  }
  const FeatureDataset& ds = *ingest.dataset;
  const std::uint64_t feature_seed = Rng::derive(c.seed, f.ordinal);
  row["seed"] = feature_seed;
  row["dataset"] = {{"records", ds.records.size()}, {"feature_max", ds.feature_max}, {"hash", sha256_hex(dataset_json(ds).dump())}};
  bool had_error = false;
  try {
    json descriptions = json::array();
    if (c.has_stage("describe")) {
      std::string sample_error;
      std::map<Stream, Samples> samples;
      std::shared_ptr<ChatProvider> evaluator;
      std::shared_ptr<CachingChatProvider> evaluator_cache;
      std::shared_ptr<SteeringBackend> steering;
      if (c.has_stage("evaluate") && !c.metrics.empty()) {
        samples = draw_samples(sh, f, ds, feature_seed, sample_error);
        auto inner = c.evaluator.type == "label" ? make_label_evaluator(c, samples) : sh.evaluator_inner;
        if (c.offline && c.evaluator.type == "remote") inner = nullptr;
        evaluator_cache = std::make_shared<CachingChatProvider>(inner, sh.evaluator_cache, inner == nullptr);
        evaluator = evaluator_cache;
        auto raw_steering = make_steering(c.backend.steering, ds.feature_max);
        if (raw_steering) {
          if (c.offline && c.backend.steering["type"] == "remote") raw_steering = nullptr;
          steering = std::make_shared<CachingBackend>(nullptr, raw_steering,
                                                      sh.backend_cache / ("steering-" + short_hash(c.backend.steering)),
                                                      raw_steering == nullptr);
        }
      }
      for (const auto& spec : c.methods) {
        auto t0 = Clock::now();
        Description d;
        try {
          d = describe_feature(*sh.explainer, spec, ds);
        } catch (const DescribeError& e) {
          descriptions.push_back({{"method", to_string(spec.method)}, {"error", e.what()}});
          had_error = true;
          continue;
        }
        sh.add_time(sh.describe_ms, ms_since(t0));
        json dj = description_json(d);
        if (evaluator) {
          auto t1 = Clock::now();
          if (!sample_error.empty()) {
            dj["metrics"] = {{"error", sample_error}};
            had_error = true;
          } else if (d.extracted.empty()) {
            dj["metrics"] = {{"error", "no description to evaluate: " + d.diagnostic}};
            had_error = true;
          } else {
            dj["metrics"] = evaluate_description(sh, f, ds, d, spec, *evaluator, steering.get(), samples, feature_seed,
                                                 had_error);
          }
          sh.add_time(sh.evaluate_ms, ms_since(t1));
        }
        descriptions.push_back(std::move(dj));
      }
      if (evaluator_cache) sh.note_consumed(sh.evaluator_cache, evaluator_cache->consumed(), "llm");
      if (auto* cb = dynamic_cast<CachingBackend*>(steering.get())) {
        sh.note_consumed(sh.backend_cache / ("steering-" + short_hash(c.backend.steering)), cb->consumed(), "backend");
      }
    }
    row["descriptions"] = std::move(descriptions);
    if (c.has_stage("consistency") && c.consistency.samples >= 2) {
      auto t0 = Clock::now();
      row["consistency"] = run_consistency(sh, ds, feature_seed);
      sh.add_time(sh.consistency_ms, ms_since(t0));
    }
    row["status"] = had_error ? "partial" : "ok";
    failed = had_error;
  } catch (const ProviderFailure& e) {
    row = {{"feature", feature_json(f)}, {"status", "failed"}, {"error", e.what()}};
    failed = provider = true;
  } catch (const std::exception& e) {
    row = {{"feature", feature_json(f)}, {"status", "failed"}, {"error", e.what()}};
    failed = true;
    provider = is_provider_error(e);
  }
  return row;
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  return fmt::format("{}", v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  return "\"" + text::replace_all(s, "\"", "\"\"") + "\"";
}

}  // namespace

JobSummary run_job(const JobConfig& config) {
  const auto job_start = Clock::now();
  JobSummary summary;
  summary.out_dir = config.out_dir;
  json timings = json::object();

  auto features = resolve_features(config);
  summary.features = features.size();

  // Ingest everything first: other features' records are the negative pool.
  auto t0 = Clock::now();
  auto source = make_source(config);
  std::vector<FeatureRef> refs;
  for (const auto& f : features) refs.push_back(f.ref);
  auto ingested = ingest_features(*source, refs, config.workers);
  std::vector<FeatureDataset> pool;
  for (const auto& r : ingested) {
    if (r.dataset) pool.push_back(*r.dataset);
  }
  timings["ingest_ms"] = ms_since(t0);

  std::shared_ptr<ChatProvider> explainer_inner;
  if (!(config.offline && config.explainer.type == "remote")) {
    explainer_inner = config.explainer.type == "remote" ? make_remote_chat(config.explainer.settings)
                                                        : make_scripted(config.explainer.settings);
  }
  const auto explainer_cache = chat_cache_dir(config, config.explainer);
  Shared sh{config,
            pool,
            std::make_shared<CachingChatProvider>(explainer_inner, explainer_cache, explainer_inner == nullptr),
            nullptr,
            chat_cache_dir(config, config.evaluator),
            nullptr,
            config.cache_dir / "mock"};
  if (config.evaluator.type == "remote" && !config.offline) sh.evaluator_inner = make_remote_chat(config.evaluator.settings);
  if (config.evaluator.type == "scripted") sh.evaluator_inner = make_scripted(config.evaluator.settings);
  const bool remote_activation = config.backend.activation["type"] == "remote";
  sh.backend_cache = remote_activation || config.backend.steering["type"] == "remote" ? config.cache_dir : config.cache_dir / "mock";
  const auto activation_cache = sh.backend_cache / ("activation-" + short_hash(config.backend.activation));
  if (auto act = make_activation(config.backend.activation)) {
    if (config.offline && remote_activation) act = nullptr;
    sh.activation = std::make_shared<CachingBackend>(act, nullptr, activation_cache, act == nullptr);
  }

  t0 = Clock::now();
  std::vector<json> rows(features.size());
  std::vector<char> failed(features.size(), 0), provider(features.size(), 0);
  for_each_bounded(features.size(), config.workers, [&](std::size_t i) {
    bool f = false, p = false;
    rows[i] = process_feature(sh, features[i], ingested[i], f, p);
    failed[i] = f;
    provider[i] = p;
  });
  timings["features_ms"] = ms_since(t0);
  timings["describe_ms"] = sh.describe_ms;
  timings["evaluate_ms"] = sh.evaluate_ms;
  timings["consistency_ms"] = sh.consistency_ms;
  sh.note_consumed(explainer_cache, sh.explainer->consumed(), "llm");
  if (sh.activation) sh.note_consumed(activation_cache, sh.activation->consumed(), "backend");

  std::filesystem::create_directories(config.out_dir);
  std::string jsonl;
  for (const auto& r : rows) jsonl += r.dump() + "\n";
  write_atomically(config.out_dir / "results.jsonl", jsonl);
  std::vector<std::string> outputs = {"results.jsonl"};

  if (config.has_stage("analyze")) {
    t0 = Clock::now();
    write_analysis(analyze_results(rows, config), config.out_dir);
    for (const char* f : {"complexity_by_layer.csv", "consistency.csv", "lengths.csv", "costs.csv", "significance.csv"}) {
      outputs.push_back(f);
    }
    timings["analyze_ms"] = ms_since(t0);
  }

  for (std::size_t i = 0; i < features.size(); ++i) {
    summary.failed += failed[i] ? 1 : 0;
    summary.provider_failures += provider[i] ? 1 : 0;
  }
  if (summary.failed == 0) {
    summary.exit_code = 0;
  } else if (summary.failed == summary.features && summary.provider_failures > 0) {
    summary.exit_code = 3;
  } else {
    summary.exit_code = 4;
  }

  // Inputs: config, every dataset, and every cache entry the run consumed.
  std::string inputs = sha256_hex(config.source.dump());
  json data_hashes = json::object();
  for (const auto& r : rows) {
    if (r.contains("dataset")) data_hashes[r["feature"]["key"].get<std::string>()] = r["dataset"]["hash"];
  }
  inputs += data_hashes.dump();
  json cache_entries = json::object();
  for (const auto& rel : sh.consumed) {
    auto path = config.cache_dir / rel;
    cache_entries[rel] = std::filesystem::exists(path) ? sha256_hex(read_file(path)) : "";
  }
  inputs += cache_entries.dump();
  json seeds = json::object();
  for (const auto& f : features) seeds[f.ref.key()] = Rng::derive(config.seed, f.ordinal);
  timings["total_ms"] = ms_since(job_start);
  json manifest = {
      {"config_hash", sha256_hex(config.source.dump())},
      {"inputs_hash", sha256_hex(inputs)},
      {"seed", config.seed},
      {"feature_seeds", seeds},
      {"stages", config.stages},
      {"providers",
       {{"data", source->id()},
        {"explainer", sh.explainer->id()},
        {"evaluator", config.evaluator.type == "label"
                          ? fmt::format("label-evaluator:{}", config.evaluator.settings.value("policy", "oracle"))
                          : (sh.evaluator_inner ? sh.evaluator_inner->id() : std::string("cache-replay"))},
        {"activation", sh.activation ? sh.activation->id() : "none"},
        {"steering", config.backend.steering.value("type", "none")}}},
      {"offline", config.offline},
      {"datasets", data_hashes},
      {"cache", {{"dir", config.cache_dir.string()}, {"consumed", cache_entries}}},
      {"features", {{"total", summary.features}, {"failed", summary.failed}, {"provider_failures", summary.provider_failures}}},
      {"exit_code", summary.exit_code},
      {"outputs", outputs},
      {"timings", timings}};
  write_atomically(config.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------
// Analysis.

std::vector<json> read_results(const std::filesystem::path& path) {
  std::vector<json> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw std::runtime_error(fmt::format("{} line {}: {}", path.string(), n, e.what()));
    }
  }
  return out;
}

AnalysisOutputs analyze_results(const std::vector<json>& results, const JobConfig& config) {
  AnalysisOutputs out;
  std::map<int, std::vector<ComplexityProfile>> by_layer;
  std::map<std::string, std::vector<Description>> by_method;
  // metric -> method -> feature key -> score
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> scores;
  out.consistency = "feature,layer,method,n,pairwise,modal\n";

  for (const auto& row : results) {
    if (!row.contains("descriptions")) continue;
    const auto& f = row["feature"];
    FeatureRef ref{f["model"], f["source"], f["index"]};
    const int layer = f["layer"];
    for (const auto& dj : row["descriptions"]) {
      if (dj.contains("error")) continue;
      Description d = description_from_json(dj, ref);
      if (d.parsed) by_layer[layer].push_back(complexity_profile(*d.parsed));
      if (!d.extracted.empty()) by_method[dj["method"]].push_back(d);
      if (dj.contains("metrics")) {
        for (const auto& [metric, m] : dj["metrics"].items()) {
          if (m.is_object() && m.contains("score") && m["score"].is_number()) {
            scores[metric][dj["method"]][f["key"]] = m["score"].get<double>();
          }
        }
      }
    }
    for (const auto& c : row.value("consistency", json::array())) {
      if (c.contains("error")) continue;
      out.consistency += fmt::format("{},{},{},{},{},{}\n", csv_field(f["key"]), layer, c["method"].get<std::string>(),
                                     c["n"].get<std::size_t>(), csv_number(c["pairwise"]), csv_number(c["modal"]));
    }
  }

  std::vector<LayerRow> rows;
  if (!by_layer.empty()) rows = layer_summary(by_layer);
  out.complexity_by_layer = complexity_csv(rows);

  out.lengths = "method,n,median,q1,q3\n";
  out.costs = "method,n,mean_prompt_tokens,mean_completion_tokens,total_cost,mean_cost\n";
  for (const auto& [method, descs] : by_method) {
    auto ls = length_stats(descs);
    out.lengths += fmt::format("{},{},{},{},{}\n", method, descs.size(), csv_number(ls.median), csv_number(ls.q1),
                               csv_number(ls.q3));
    Decimal total;
    double prompt = 0, completion = 0;
    for (const auto& d : descs) {
      total += cost_per_feature({config.price_in, config.price_out, d.prompt_tokens, 0, d.completion_tokens});
      prompt += static_cast<double>(d.prompt_tokens);
      completion += static_cast<double>(d.completion_tokens);
    }
    const double n = static_cast<double>(descs.size());
    out.costs += fmt::format("{},{},{},{},{},{:.8f}\n", method, descs.size(), csv_number(prompt / n),
                             csv_number(completion / n), total.to_string(), total.to_double() / n);
  }

  // Semantic regexes against each other method, per metric, on features
  // where both have a score.
  struct Row {
    std::string metric, other;
    std::vector<double> a, b;
  };
  std::vector<Row> tests;
  for (const auto& [metric, per_method] : scores) {
    auto sr = per_method.find("semantic-regex");
    if (sr == per_method.end()) continue;
    for (const auto& [method, per_feature] : per_method) {
      if (method == "semantic-regex") continue;
      Row r{metric, method, {}, {}};
      for (const auto& [key, score] : sr->second) {
        auto it = per_feature.find(key);
        if (it == per_feature.end()) continue;
        r.a.push_back(score);
        r.b.push_back(it->second);
      }
      if (r.a.size() >= 3) tests.push_back(std::move(r));
    }
  }
  out.significance = "metric,method_a,method_b,n,margin,mean_diff,sd,t,p,p_adjusted,flagged\n";
  for (const auto& r : tests) {
    auto t = noninferiority_test(r.a, r.b, config.noninferiority_margin, tests.size());
    out.significance += fmt::format("{},semantic-regex,{},{},{},{},{},{},{},{},{}\n", r.metric, r.other, t.n,
                                    csv_number(config.noninferiority_margin), csv_number(t.mean_diff), csv_number(t.sd),
                                    std::isinf(t.t) ? (t.t > 0 ? "inf" : "-inf") : csv_number(t.t), csv_number(t.p),
                                    csv_number(t.p_adjusted), t.flagged ? "true" : "false");
  }
  return out;
}

void write_analysis(const AnalysisOutputs& o, const std::filesystem::path& dir) {
  write_atomically(dir / "complexity_by_layer.csv", o.complexity_by_layer);
  write_atomically(dir / "consistency.csv", o.consistency);
  write_atomically(dir / "lengths.csv", o.lengths);
  write_atomically(dir / "costs.csv", o.costs);
  write_atomically(dir / "significance.csv", o.significance);
}

}  // namespace semrex
