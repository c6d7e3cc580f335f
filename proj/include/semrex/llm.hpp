#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace semrex {

enum class Role { system, user, assistant };

std::string_view to_string(Role r);
Role parse_role(std::string_view name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  double top_p = 1.0;
  std::optional<int> max_tokens;
  /// Distinguishes repeated independent draws of one request. Not part of
  /// the request hash; the cache keys records by (hash, sample).
  std::size_t sample = 0;

  /// Throws std::invalid_argument when messages are empty, a system message
  /// appears anywhere but first, or a sampling parameter is negative.
  void validate() const;
  /// Last user message, or empty when there is none.
  const std::string& last_user() const;
};

/// Wire body in chat-completions shape.
nlohmann::json to_json(const ChatRequest& r);
ChatRequest request_from_json(const nlohmann::json& j);

/// SHA-256 over model, messages, temperature, top_p and max_tokens.
std::string request_hash(const ChatRequest& r);

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct Provenance {
  std::string provider;
  std::string model;
  std::string request_hash;
};

struct ChatResponse {
  std::string content;
  Usage usage;
  Provenance provenance;
};

class LlmError : public std::runtime_error {
 public:
  explicit LlmError(const std::string& what, int attempts = 0) : std::runtime_error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class MockMiss : public LlmError {
 public:
  using LlmError::LlmError;
};

class CacheMiss : public LlmError {
 public:
  using LlmError::LlmError;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

struct RemoteChatConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string path = "/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  int max_attempts = 5;
  int max_in_flight = 8;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};
};

/// Posts to a chat-completions endpoint and returns the first choice.
/// Retries on transport errors, 408, 429 and 5xx with exponential backoff.
class RemoteChatProvider : public ChatProvider {
 public:
  explicit RemoteChatProvider(RemoteChatConfig config);
  ~RemoteChatProvider() override;
  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Deterministic provider for tests and offline runs. Rules are tried in
/// insertion order; the first one returning a value answers. Usage counts are
/// ceil(chars / 4) over message contents and the reply.
class ScriptedChatProvider : public ChatProvider {
 public:
  using Rule = std::function<std::optional<std::string>(const ChatRequest&)>;

  explicit ScriptedChatProvider(std::string name = "mock") : name_(std::move(name)) {}

  ScriptedChatProvider& add(Rule rule);
  /// Answers `reply` when the last user message contains `needle`.
  ScriptedChatProvider& when_contains(std::string needle, std::string reply);
  ScriptedChatProvider& fallback(std::string reply);

  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return name_; }
  std::size_t calls() const;

 private:
  std::string name_;
  std::vector<Rule> rules_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

std::int64_t estimate_tokens(std::string_view text);

/// Disk cache keyed by request hash. Records are stored verbatim, before any
/// parsing. With `replay_only` or no inner provider a miss throws CacheMiss.
class CachingChatProvider : public ChatProvider {
 public:
  CachingChatProvider(std::shared_ptr<ChatProvider> inner, std::filesystem::path dir, bool replay_only = false);

  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override;

  /// Record keys (hash, or hash-sample for sample > 0) served from or written
  /// to the cache, sorted.
  std::vector<std::string> consumed() const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  std::filesystem::path record_path(const std::string& hash, std::size_t sample) const;

  std::shared_ptr<ChatProvider> inner_;
  std::filesystem::path dir_;
  bool replay_only_;
  mutable std::mutex mutex_;
  std::set<std::string> consumed_;
  std::size_t hits_ = 0, misses_ = 0;
};

}  // namespace semrex
