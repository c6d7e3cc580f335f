#include "semrex/llm.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "semrex/fsutil.hpp"
#include "semrex/hash.hpp"
#include "semrex/http.hpp"

namespace semrex {

using nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  throw std::invalid_argument(fmt::format("unknown role '{}'", name));
}

void ChatRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("chat request has no messages");
  for (std::size_t i = 1; i < messages.size(); ++i) {
    if (messages[i].role == Role::system) throw std::invalid_argument("system message must come first");
  }
  if (!(temperature >= 0) || !(top_p >= 0)) throw std::invalid_argument("temperature and top_p must be >= 0");
  if (max_tokens && *max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
}

const std::string& ChatRequest::last_user() const {
  static const std::string empty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::user) return it->content;
  }
  return empty;
}

json to_json(const ChatRequest& r) {
  json msgs = json::array();
  for (const auto& m : r.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  json j = {{"model", r.model}, {"messages", msgs}, {"temperature", r.temperature}, {"top_p", r.top_p}};
  if (r.max_tokens) j["max_tokens"] = *r.max_tokens;
  return j;
}

ChatRequest request_from_json(const json& j) {
  ChatRequest r;
  r.model = j.at("model").get<std::string>();
  for (const auto& m : j.at("messages")) {
    r.messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  }
  r.temperature = j.value("temperature", 1.0);
  r.top_p = j.value("top_p", 1.0);
  if (j.contains("max_tokens") && !j["max_tokens"].is_null()) r.max_tokens = j["max_tokens"].get<int>();
  return r;
}

std::string request_hash(const ChatRequest& r) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  json j = to_json(r);
  if (!r.max_tokens) j["max_tokens"] = nullptr;
  return sha256_hex(j.dump());
}

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

// ---------------------------------------------------------------------------

struct RemoteChatProvider::Impl {
  RemoteChatConfig config;
  HttpClient client;
  std::counting_semaphore<> slots;

  explicit Impl(RemoteChatConfig c)
      : config(std::move(c)), client(config.base_url, config.timeout), slots(std::max(1, config.max_in_flight)) {}
};

RemoteChatProvider::RemoteChatProvider(RemoteChatConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  if (impl_->config.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
}

RemoteChatProvider::~RemoteChatProvider() = default;

std::string RemoteChatProvider::id() const { return "remote:" + impl_->config.base_url; }

namespace {

bool transient_status(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

struct SlotGuard {
  std::counting_semaphore<>& s;
  explicit SlotGuard(std::counting_semaphore<>& sem) : s(sem) { s.acquire(); }
  ~SlotGuard() { s.release(); }
};

}  // namespace

ChatResponse RemoteChatProvider::complete(const ChatRequest& request) {
  request.validate();
  const auto& cfg = impl_->config;
  HttpHeaders headers;
  if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = to_json(request).dump();
  const std::string hash = request_hash(request);

  SlotGuard guard(impl_->slots);
  auto backoff = cfg.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    HttpResponse resp = impl_->client.post(cfg.path, body, "application/json", headers);
    if (resp.ok()) {
      try {
        json j = json::parse(resp.body);
        ChatResponse out;
        out.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
          out.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
          out.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
        }
        out.provenance = {id(), j.value("model", request.model), hash};
        return out;
      } catch (const json::exception& e) {
        throw LlmError(fmt::format("malformed chat response: {}", e.what()), attempt);
      }
    }
    last_error = resp.status == 0 ? resp.error : fmt::format("HTTP {}: {}", resp.status, resp.body.substr(0, 200));
    if (!transient_status(resp.status)) {
      throw LlmError(fmt::format("chat request failed: {}", last_error), attempt);
    }
    if (attempt < cfg.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw LlmError(fmt::format("chat request failed after {} attempts: {}", cfg.max_attempts, last_error),
                 cfg.max_attempts);
}

// ---------------------------------------------------------------------------

ScriptedChatProvider& ScriptedChatProvider::add(Rule rule) {
  rules_.push_back(std::move(rule));
  return *this;
}

ScriptedChatProvider& ScriptedChatProvider::when_contains(std::string needle, std::string reply) {
  return add([needle = std::move(needle), reply = std::move(reply)](const ChatRequest& r) -> std::optional<std::string> {
    if (r.last_user().find(needle) != std::string::npos) return reply;
    return std::nullopt;
  });
}

ScriptedChatProvider& ScriptedChatProvider::fallback(std::string reply) {
  return add([reply = std::move(reply)](const ChatRequest&) -> std::optional<std::string> { return reply; });
}

std::size_t ScriptedChatProvider::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

ChatResponse ScriptedChatProvider::complete(const ChatRequest& request) {
  request.validate();
  {
    std::lock_guard lock(mutex_);
    ++calls_;
  }
  for (const auto& rule : rules_) {
    if (auto reply = rule(request)) {
      ChatResponse out;
      out.content = *reply;
      for (const auto& m : request.messages) out.usage.prompt_tokens += estimate_tokens(m.content);
      out.usage.completion_tokens = estimate_tokens(out.content);
      out.provenance = {name_, request.model, request_hash(request)};
      return out;
    }
  }
  const auto& user = request.last_user();
  throw MockMiss(fmt::format("no scripted response for request ending: {}", user.substr(0, 120)));
}

// ---------------------------------------------------------------------------

CachingChatProvider::CachingChatProvider(std::shared_ptr<ChatProvider> inner, std::filesystem::path dir,
                                         bool replay_only)
    : inner_(std::move(inner)), dir_(std::move(dir)), replay_only_(replay_only) {}

std::string CachingChatProvider::id() const {
  return fmt::format("cache({})", inner_ ? inner_->id() : std::string("replay"));
}

namespace {

std::string record_key(const std::string& hash, std::size_t sample) {
  return sample == 0 ? hash : fmt::format("{}-{}", hash, sample);
}

}  // namespace

std::filesystem::path CachingChatProvider::record_path(const std::string& hash, std::size_t sample) const {
  return dir_ / "llm" / (record_key(hash, sample) + ".json");
}

ChatResponse CachingChatProvider::complete(const ChatRequest& request) {
  request.validate();
  const std::string hash = request_hash(request);
  const std::string key = record_key(hash, request.sample);
  const auto path = record_path(hash, request.sample);
  if (std::filesystem::exists(path)) {
    json j = json::parse(read_file(path));
    const auto& r = j.at("response");
    ChatResponse out;
    out.content = r.at("content").get<std::string>();
    out.usage.prompt_tokens = r.at("usage").at("prompt_tokens").get<std::int64_t>();
    out.usage.completion_tokens = r.at("usage").at("completion_tokens").get<std::int64_t>();
    out.provenance = {r.at("provider").get<std::string>(), r.at("model").get<std::string>(), hash};
    std::lock_guard lock(mutex_);
    consumed_.insert(key);
    ++hits_;
    return out;
  }
  if (replay_only_ || !inner_) throw CacheMiss(fmt::format("no cached response for request {}", key));
  ChatResponse out = inner_->complete(request);
  out.provenance.request_hash = hash;
  json record = {{"request", to_json(request)},
                 {"response",
                  {{"content", out.content},
                   {"usage", {{"prompt_tokens", out.usage.prompt_tokens},
                              {"completion_tokens", out.usage.completion_tokens}}},
                   {"provider", out.provenance.provider},
                   {"model", out.provenance.model}}}};
  write_atomically(path, record.dump(2) + "\n");
  std::lock_guard lock(mutex_);
  consumed_.insert(key);
  ++misses_;
  return out;
}

std::vector<std::string> CachingChatProvider::consumed() const {
  std::lock_guard lock(mutex_);
  return {consumed_.begin(), consumed_.end()};
}

std::size_t CachingChatProvider::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t CachingChatProvider::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace semrex
