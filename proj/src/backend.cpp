#include "semrex/backend.hpp"

#include <chrono>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"
#include "semrex/fsutil.hpp"
#include "semrex/hash.hpp"
#include "semrex/http.hpp"
#include "semrex/text.hpp"

namespace semrex {

using nlohmann::json;

std::vector<std::string> simple_tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto word_char = [](unsigned char c) { return std::isalnum(c) || c >= 0x80 || c == '\''; };
  while (i < text.size()) {
    std::size_t start = i;
    while (i < text.size() && text::is_space(text[i])) ++i;
    if (i == text.size()) {
      if (out.empty()) {
        out.push_back(text.substr(start));
      } else {
        out.back() += text.substr(start);
      }
      break;
    }
    if (word_char(static_cast<unsigned char>(text[i]))) {
      while (i < text.size() && word_char(static_cast<unsigned char>(text[i]))) ++i;
    } else {
      ++i;
    }
    out.push_back(text.substr(start, i - start));
  }
  return out;
}

double peak_activation(const ActivationRecord& record) {
  double best = 0.0;
  for (std::size_t i = 0; i < record.tokens.size(); ++i) {
    if (!record.is_bos(i)) best = std::max(best, record.activations[i]);
  }
  return best;
}

namespace {

ActivationRecord record_of(std::vector<std::string> tokens, std::vector<double> values) {
  if (tokens.empty()) {
    tokens.push_back("");
    values.push_back(0.0);
  }
  return make_record(std::move(tokens), std::move(values));
}

}  // namespace

KeywordActivationBackend::KeywordActivationBackend(std::map<std::string, double> weights) {
  for (auto& [k, v] : weights) weights_[text::to_lower(k)] = v;
}

std::vector<ActivationRecord> KeywordActivationBackend::activate(const FeatureRef&,
                                                                 const std::vector<std::string>& texts) {
  std::vector<ActivationRecord> out;
  for (const auto& t : texts) {
    auto tokens = simple_tokenize(t);
    std::vector<double> values;
    for (const auto& tok : tokens) {
      auto word = text::to_lower(text::strip_punctuation(text::trim(tok)));
      auto it = weights_.find(word);
      values.push_back(it == weights_.end() ? 0.0 : it->second);
    }
    out.push_back(record_of(std::move(tokens), std::move(values)));
  }
  return out;
}

std::vector<ActivationRecord> ConstantActivationBackend::activate(const FeatureRef&,
                                                                  const std::vector<std::string>& texts) {
  std::vector<ActivationRecord> out;
  for (const auto& t : texts) {
    auto tokens = simple_tokenize(t);
    std::vector<double> values(tokens.size(), value_);
    out.push_back(record_of(std::move(tokens), std::move(values)));
  }
  return out;
}

KeywordSteeringBackend::KeywordSteeringBackend(double threshold, std::string steered, std::string neutral)
    : threshold_(threshold), steered_(std::move(steered)), neutral_(std::move(neutral)) {}

std::string KeywordSteeringBackend::generate(const std::string&, const FeatureRef&, double strength,
                                             std::size_t n_tokens) {
  auto tokens = simple_tokenize(strength >= threshold_ ? steered_ : neutral_);
  if (tokens.size() > n_tokens) tokens.resize(n_tokens);
  return text::join(tokens, "");
}

std::string UnavailableSteeringBackend::generate(const std::string&, const FeatureRef& feature, double,
                                                 std::size_t) {
  throw BackendUnavailable(fmt::format("no steering backend configured for {}", feature.key()));
}

// ---------------------------------------------------------------------------

struct RemoteBackend::Impl {
  HttpClient client;
  int max_attempts;
};

RemoteBackend::RemoteBackend(std::string base_url, int max_attempts)
    : impl_(std::make_unique<Impl>(Impl{HttpClient(base_url), std::max(1, max_attempts)})) {}

RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::id() const { return "remote:" + impl_->client.base_url(); }

std::string RemoteBackend::post(const std::string& path, const std::string& body) {
  std::string last;
  auto backoff = std::chrono::milliseconds(200);
  for (int attempt = 1; attempt <= impl_->max_attempts; ++attempt) {
    auto resp = impl_->client.post(path, body, "application/json");
    if (resp.ok()) return resp.body;
    if (resp.status == 404 || resp.status == 501) {
      throw BackendUnavailable(fmt::format("backend {} does not serve {}", impl_->client.base_url(), path));
    }
    last = resp.status == 0 ? resp.error : fmt::format("HTTP {}", resp.status);
    if (resp.status != 0 && resp.status < 500 && resp.status != 429) break;
    if (attempt < impl_->max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw BackendError(fmt::format("backend request {} failed: {}", path, last));
}

namespace {

json feature_json(const FeatureRef& f) {
  return {{"model", f.model_id}, {"source", f.source_id}, {"index", f.feature_index}};
}

}  // namespace

std::vector<ActivationRecord> RemoteBackend::activate(const FeatureRef& feature,
                                                      const std::vector<std::string>& texts) {
  json req = {{"feature", feature_json(feature)}, {"texts", texts}};
  try {
    json resp = json::parse(post("/activate", req.dump()));
    const auto& results = resp.at("results");
    if (results.size() != texts.size()) throw BackendError("backend returned a different number of results");
    std::vector<ActivationRecord> out;
    for (const auto& r : results) {
      out.push_back(record_of(r.at("tokens").get<std::vector<std::string>>(), r.at("values").get<std::vector<double>>()));
    }
    return out;
  } catch (const json::exception& e) {
    throw BackendError(fmt::format("malformed activation response: {}", e.what()));
  } catch (const DataError& e) {
    throw BackendError(fmt::format("invalid activation response: {}", e.what()));
  }
}

std::string RemoteBackend::generate(const std::string& prompt, const FeatureRef& feature, double strength,
                                    std::size_t n_tokens) {
  json req = {{"feature", feature_json(feature)}, {"prompt", prompt}, {"strength", strength}, {"n_tokens", n_tokens}};
  try {
    return json::parse(post("/steer", req.dump())).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(fmt::format("malformed steering response: {}", e.what()));
  }
}

// ---------------------------------------------------------------------------

CachingBackend::CachingBackend(std::shared_ptr<ActivationBackend> activation, std::shared_ptr<SteeringBackend> steering,
                               std::filesystem::path dir, bool replay_only)
    : activation_(std::move(activation)), steering_(std::move(steering)), dir_(std::move(dir)),
      replay_only_(replay_only) {}

std::string CachingBackend::id() const {
  std::string a = activation_ ? activation_->id() : "none";
  std::string s = steering_ ? steering_->id() : "none";
  return fmt::format("cache({}, {})", a, s);
}

std::string CachingBackend::lookup(const std::string& request, const std::function<std::string()>& compute) {
  const std::string key = sha256_hex(request);
  const auto path = dir_ / "backend" / (key + ".json");
  std::string response;
  if (std::filesystem::exists(path)) {
    response = nlohmann::json::parse(read_file(path)).at("response").dump();
  } else {
    if (replay_only_) throw BackendError(fmt::format("no cached backend response for request {}", key));
    response = compute();
    nlohmann::json record = {{"request", nlohmann::json::parse(request)}, {"response", nlohmann::json::parse(response)}};
    write_atomically(path, record.dump(2) + "\n");
  }
  std::lock_guard lock(mutex_);
  consumed_.insert(key);
  return response;
}

std::vector<ActivationRecord> CachingBackend::activate(const FeatureRef& feature, const std::vector<std::string>& texts) {
  nlohmann::json req = {{"op", "activate"},
                        {"backend", activation_ ? activation_->id() : "none"},
                        {"feature", feature.key()},
                        {"texts", texts}};
  auto response = nlohmann::json::parse(lookup(req.dump(), [&] {
    if (!activation_) throw BackendUnavailable("no activation backend configured");
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : activation_->activate(feature, texts)) out.push_back({{"tokens", r.tokens}, {"values", r.activations}});
    return out.dump();
  }));
  std::vector<ActivationRecord> records;
  for (const auto& r : response) {
    records.push_back(make_record(r.at("tokens").get<std::vector<std::string>>(), r.at("values").get<std::vector<double>>()));
  }
  return records;
}

std::string CachingBackend::generate(const std::string& prompt, const FeatureRef& feature, double strength,
                                     std::size_t n_tokens) {
  nlohmann::json req = {{"op", "steer"},
                        {"backend", steering_ ? steering_->id() : "none"},
                        {"feature", feature.key()},
                        {"prompt", prompt},
                        {"strength", strength},
                        {"n_tokens", n_tokens}};
  auto response = lookup(req.dump(), [&] {
    if (!steering_) throw BackendUnavailable("no steering backend configured");
    return nlohmann::json(steering_->generate(prompt, feature, strength, n_tokens)).dump();
  });
  return nlohmann::json::parse(response).get<std::string>();
}

std::vector<std::string> CachingBackend::consumed() const {
  std::lock_guard lock(mutex_);
  return {consumed_.begin(), consumed_.end()};
}

}  // namespace semrex
