#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "semrex/data.hpp"

namespace semrex {

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The backend cannot serve this feature or operation at all.
class BackendUnavailable : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Per-token activations of a feature on arbitrary text.
class ActivationBackend {
 public:
  virtual ~ActivationBackend() = default;
  virtual std::vector<ActivationRecord> activate(const FeatureRef& feature, const std::vector<std::string>& texts) = 0;
  virtual std::string id() const = 0;
};

/// Continuations generated with a feature's value pinned to `strength`.
class SteeringBackend {
 public:
  virtual ~SteeringBackend() = default;
  virtual std::string generate(const std::string& prompt, const FeatureRef& feature, double strength,
                               std::size_t n_tokens) = 0;
  virtual std::string id() const = 0;
};

/// Splits text into word tokens carrying their leading whitespace, with each
/// punctuation character as its own token. Concatenation restores the text.
std::vector<std::string> simple_tokenize(const std::string& text);

/// Max activation over non-BOS tokens, 0 for an empty record.
double peak_activation(const ActivationRecord& record);

/// Activates on tokens whose lowercased, punctuation-stripped word is a key of
/// `weights`; every other token gets 0. Weights apply to all features.
class KeywordActivationBackend : public ActivationBackend {
 public:
  explicit KeywordActivationBackend(std::map<std::string, double> weights);
  std::vector<ActivationRecord> activate(const FeatureRef& feature, const std::vector<std::string>& texts) override;
  std::string id() const override { return "keyword"; }

 private:
  std::map<std::string, double> weights_;
};

/// Every token gets the same value.
class ConstantActivationBackend : public ActivationBackend {
 public:
  explicit ConstantActivationBackend(double value) : value_(value) {}
  std::vector<ActivationRecord> activate(const FeatureRef& feature, const std::vector<std::string>& texts) override;
  std::string id() const override { return "constant"; }

 private:
  double value_;
};

/// Steering mock: below `threshold` the continuation is `neutral`; at or above
/// it, `steered`. Continuations are truncated to n_tokens tokens.
class KeywordSteeringBackend : public SteeringBackend {
 public:
  KeywordSteeringBackend(double threshold, std::string steered, std::string neutral);
  std::string generate(const std::string& prompt, const FeatureRef& feature, double strength,
                       std::size_t n_tokens) override;
  std::string id() const override { return "keyword-steering"; }

 private:
  double threshold_;
  std::string steered_, neutral_;
};

/// Steering that always fails; lets pipelines report faithfulness as skipped.
class UnavailableSteeringBackend : public SteeringBackend {
 public:
  std::string generate(const std::string&, const FeatureRef& feature, double, std::size_t) override;
  std::string id() const override { return "none"; }
};

/// HTTP contract:
///   POST {base}/activate  {"feature":{model,source,index},"texts":[...]}
///     -> {"results":[{"tokens":[...],"values":[...]}, ...]}
///   POST {base}/steer     {"feature":{...},"prompt":s,"strength":x,"n_tokens":n}
///     -> {"text": continuation}
/// 404 or 501 raise BackendUnavailable; other failures raise BackendError.
class RemoteBackend : public ActivationBackend, public SteeringBackend {
 public:
  explicit RemoteBackend(std::string base_url, int max_attempts = 3);
  ~RemoteBackend() override;
  std::vector<ActivationRecord> activate(const FeatureRef& feature, const std::vector<std::string>& texts) override;
  std::string generate(const std::string& prompt, const FeatureRef& feature, double strength,
                       std::size_t n_tokens) override;
  std::string id() const override;

 private:
  std::string post(const std::string& path, const std::string& body);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Disk memo for a backend pair: responses stored under `dir/backend/<key>.json`
/// with key = sha256 of the request. In replay-only mode a miss raises
/// BackendError. Either inner backend may be null.
class CachingBackend : public ActivationBackend, public SteeringBackend {
 public:
  CachingBackend(std::shared_ptr<ActivationBackend> activation, std::shared_ptr<SteeringBackend> steering,
                 std::filesystem::path dir, bool replay_only = false);
  std::vector<ActivationRecord> activate(const FeatureRef& feature, const std::vector<std::string>& texts) override;
  std::string generate(const std::string& prompt, const FeatureRef& feature, double strength,
                       std::size_t n_tokens) override;
  std::string id() const override;
  /// Cache keys read or written so far, sorted.
  std::vector<std::string> consumed() const;

 private:
  std::string lookup(const std::string& request, const std::function<std::string()>& compute);
  std::shared_ptr<ActivationBackend> activation_;
  std::shared_ptr<SteeringBackend> steering_;
  std::filesystem::path dir_;
  bool replay_only_;
  mutable std::mutex mutex_;
  std::set<std::string> consumed_;
};

}  // namespace semrex
