#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace semrex {

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;  // 0 when no response was received
  std::string body;
  std::string error;  // transport error, empty when a response arrived
  bool ok() const { return status >= 200 && status < 300; }
};

/// Minimal blocking client for `http://` and `https://` base URLs. The base
/// URL may carry a path prefix, which is prepended to every request path.
/// Safe to share between threads: each request opens its own connection.
class HttpClient {
 public:
  explicit HttpClient(const std::string& base_url, std::chrono::seconds timeout = std::chrono::seconds(60));
  ~HttpClient();
  HttpClient(HttpClient&&) noexcept;
  HttpClient& operator=(HttpClient&&) noexcept;

  HttpResponse get(const std::string& path, const HttpHeaders& headers = {}) const;
  HttpResponse post(const std::string& path, const std::string& body, const std::string& content_type,
                    const HttpHeaders& headers = {}) const;

  const std::string& base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace semrex
