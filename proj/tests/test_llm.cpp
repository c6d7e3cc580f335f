#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "semrex/llm.hpp"

using namespace semrex;

namespace {

ChatRequest sample_request() {
  ChatRequest r;
  r.model = "gpt-4o-mini";
  r.messages = {{Role::system, "You judge."}, {Role::user, "Latent explanation: x\n\nTest examples:\n..."}};
  r.temperature = 0.0;
  r.top_p = 1.0;
  return r;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

/// Chat-completions endpoint on a loopback port.
struct FakeChatServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::atomic<int> failures_left{0};
  int failure_status = 503;
  std::string seen_auth;
  nlohmann::json last_body;

  FakeChatServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      seen_auth = req.get_header_value("Authorization");
      last_body = nlohmann::json::parse(req.body);
      if (failures_left > 0) {
        --failures_left;
        res.status = failure_status;
        return;
      }
      nlohmann::json out = {
          {"model", "gpt-4o-mini-2024-07-18"},
          {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", "[1,0,1,0,1]"}}}}}},
          {"usage", {{"prompt_tokens", 42}, {"completion_tokens", 7}}}};
      res.set_content(out.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeChatServer() {
    server.stop();
    thread.join();
  }
  RemoteChatConfig config() const {
    RemoteChatConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    c.api_key_env = "SEMREX_TEST_CHAT_KEY";
    c.initial_backoff = std::chrono::milliseconds(1);
    return c;
  }
};

}  // namespace

TEST_CASE("ChatRequest validation") {
  auto r = sample_request();
  CHECK_NOTHROW(r.validate());
  ChatRequest empty;
  CHECK_THROWS(empty.validate());
  auto late_system = r;
  late_system.messages.push_back({Role::system, "again"});
  CHECK_THROWS(late_system.validate());
  auto neg = r;
  neg.temperature = -0.1;
  CHECK_THROWS(neg.validate());
  CHECK(r.last_user().rfind("Latent explanation", 0) == 0);
}

TEST_CASE("request_hash covers exactly the sampling-relevant fields") {
  const auto base = sample_request();
  const auto h = request_hash(base);
  CHECK(h.size() == 64);
  CHECK(request_hash(base) == h);

  auto r = base;
  r.model = "other";
  CHECK(request_hash(r) != h);
  r = base;
  r.messages[1].content += " ";
  CHECK(request_hash(r) != h);
  r = base;
  r.messages[0].role = Role::user;
  CHECK(request_hash(r) != h);
  r = base;
  r.messages.push_back({Role::assistant, "[1]"});
  CHECK(request_hash(r) != h);
  r = base;
  r.temperature = 0.7;
  CHECK(request_hash(r) != h);
  r = base;
  r.top_p = 0.9;
  CHECK(request_hash(r) != h);
  r = base;
  r.max_tokens = 64;
  CHECK(request_hash(r) != h);

  // Round trip through the wire format keeps the hash.
  CHECK(request_hash(request_from_json(to_json(base))) == h);
}

TEST_CASE("request_hash ignores the provider endpoint") {
  FakeChatServer a, b;
  auto ca = a.config(), cb = b.config();
  RemoteChatProvider pa(ca), pb(cb);
  auto ra = pa.complete(sample_request()), rb = pb.complete(sample_request());
  CHECK(pa.id() != pb.id());
  CHECK(ra.provenance.request_hash == rb.provenance.request_hash);
}

TEST_CASE("scripted provider") {
  ScriptedChatProvider mock;
  mock.when_contains("Test examples:", "[1,0,1,0,1]");
  auto resp = mock.complete(sample_request());
  CHECK(resp.content == "[1,0,1,0,1]");
  CHECK(resp.provenance.provider == "mock");
  CHECK(resp.usage.completion_tokens == 3);  // 11 chars
  CHECK(resp.usage.prompt_tokens == estimate_tokens("You judge.") + estimate_tokens(sample_request().last_user()));

  auto other = sample_request();
  other.messages[1].content = "unrelated";
  CHECK_THROWS_AS(mock.complete(other), MockMiss);
  mock.fallback("x");
  CHECK(mock.complete(other).content == "x");
  CHECK(mock.calls() == 3);
}

TEST_CASE("estimate_tokens rounds up") {
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("a") == 1);
  CHECK(estimate_tokens("abcd") == 1);
  CHECK(estimate_tokens("abcde") == 2);
}

TEST_CASE("remote provider: request shape, auth and usage") {
  FakeChatServer fake;
  setenv("SEMREX_TEST_CHAT_KEY", "sk-test", 1);
  RemoteChatProvider p(fake.config());
  auto req = sample_request();
  req.max_tokens = 16;
  auto resp = p.complete(req);
  unsetenv("SEMREX_TEST_CHAT_KEY");
  CHECK(resp.content == "[1,0,1,0,1]");
  CHECK(resp.usage.prompt_tokens == 42);
  CHECK(resp.usage.completion_tokens == 7);
  CHECK(resp.provenance.model == "gpt-4o-mini-2024-07-18");
  CHECK(resp.provenance.request_hash == request_hash(req));
  CHECK(fake.seen_auth == "Bearer sk-test");
  CHECK(fake.last_body["model"] == "gpt-4o-mini");
  CHECK(fake.last_body["messages"].size() == 2);
  CHECK(fake.last_body["messages"][0]["role"] == "system");
  CHECK(fake.last_body["temperature"] == 0.0);
  CHECK(fake.last_body["max_tokens"] == 16);
}

TEST_CASE("remote provider: retries transient failures, then gives up with attempt count") {
  FakeChatServer fake;
  fake.failures_left = 2;
  RemoteChatProvider p(fake.config());
  CHECK(p.complete(sample_request()).content == "[1,0,1,0,1]");
  CHECK(fake.hits == 3);

  fake.hits = 0;
  fake.failures_left = 100;
  try {
    p.complete(sample_request());
    FAIL("expected LlmError");
  } catch (const LlmError& e) {
    CHECK(e.attempts() == 5);
    CHECK(std::string(e.what()).find("5 attempts") != std::string::npos);
  }
  CHECK(fake.hits == 5);

  fake.hits = 0;
  fake.failures_left = 1;
  fake.failure_status = 400;
  try {
    p.complete(sample_request());
    FAIL("expected LlmError");
  } catch (const LlmError& e) {
    CHECK(e.attempts() == 1);
  }
  CHECK(fake.hits == 1);
}

TEST_CASE("remote provider: unreachable endpoint") {
  RemoteChatConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.max_attempts = 2;
  c.initial_backoff = std::chrono::milliseconds(1);
  RemoteChatProvider p(c);
  try {
    p.complete(sample_request());
    FAIL("expected LlmError");
  } catch (const LlmError& e) {
    CHECK(e.attempts() == 2);
  }
}

TEST_CASE("caching provider: identical request hits the network once") {
  FakeChatServer fake;
  auto dir = fresh_dir("semrex_llm_cache_test");
  auto cached = std::make_shared<CachingChatProvider>(std::make_shared<RemoteChatProvider>(fake.config()), dir);
  auto r1 = cached->complete(sample_request());
  auto r2 = cached->complete(sample_request());
  CHECK(fake.hits == 1);
  CHECK(r1.content == r2.content);
  CHECK(r1.usage.prompt_tokens == r2.usage.prompt_tokens);
  CHECK(r1.provenance.request_hash == r2.provenance.request_hash);
  CHECK(cached->hits() == 1);
  CHECK(cached->misses() == 1);
  CHECK(cached->consumed() == std::vector<std::string>{request_hash(sample_request())});

  // Replay-only sees the stored record and refuses anything else.
  CachingChatProvider replay(nullptr, dir, true);
  CHECK(replay.complete(sample_request()).content == "[1,0,1,0,1]");
  auto other = sample_request();
  other.temperature = 1.0;
  CHECK_THROWS_AS(replay.complete(other), CacheMiss);
  std::filesystem::remove_all(dir);
}

TEST_CASE("caching provider: concurrent identical requests stay consistent") {
  auto dir = fresh_dir("semrex_llm_cache_concurrent");
  auto mock = std::make_shared<ScriptedChatProvider>();
  mock->fallback("same");
  CachingChatProvider cached(mock, dir);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      if (cached.complete(sample_request()).content == "same") ++ok;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 8);
  CachingChatProvider replay(nullptr, dir, true);
  CHECK(replay.complete(sample_request()).content == "same");
  std::filesystem::remove_all(dir);
}
