#include "semrex/http.hpp"

#include <stdexcept>

#include "httplib.h"

namespace semrex {

struct HttpClient::Impl {
  std::string base_url;
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
  std::chrono::seconds timeout;

  httplib::Client client() const {
    httplib::Client c(origin);
    c.set_connection_timeout(timeout);
    c.set_read_timeout(timeout);
    c.set_write_timeout(timeout);
    return c;
  }

  std::string full_path(const std::string& path) const {
    if (path.empty() || path.front() != '/') return prefix + "/" + path;
    return prefix + path;
  }
};

namespace {

httplib::Headers to_headers(const HttpHeaders& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

HttpResponse convert(const httplib::Result& result) {
  HttpResponse out;
  if (!result) {
    out.error = httplib::to_string(result.error());
    return out;
  }
  out.status = result->status;
  out.body = result->body;
  return out;
}

}  // namespace

HttpClient::HttpClient(const std::string& base_url, std::chrono::seconds timeout) : impl_(std::make_unique<Impl>()) {
  impl_->base_url = base_url;
  impl_->timeout = timeout;
  std::size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("base URL needs a scheme: " + base_url);
  std::size_t path_start = base_url.find('/', scheme_end + 3);
  impl_->origin = base_url.substr(0, path_start);
  impl_->prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
}

HttpClient::~HttpClient() = default;
HttpClient::HttpClient(HttpClient&&) noexcept = default;
HttpClient& HttpClient::operator=(HttpClient&&) noexcept = default;

HttpResponse HttpClient::get(const std::string& path, const HttpHeaders& headers) const {
  auto c = impl_->client();
  return convert(c.Get(impl_->full_path(path), to_headers(headers)));
}

HttpResponse HttpClient::post(const std::string& path, const std::string& body, const std::string& content_type,
                              const HttpHeaders& headers) const {
  auto c = impl_->client();
  return convert(c.Post(impl_->full_path(path), to_headers(headers), body, content_type));
}

const std::string& HttpClient::base_url() const { return impl_->base_url; }

}  // namespace semrex
