#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "biaskit/annotate/types.hpp"
#include "biaskit/core/error.hpp"
#include "biaskit/core/retry.hpp"

namespace biaskit::annotate {

// Provider timeout, refusal or transport failure for one task.
class AnnotationUnavailable : public Error {
 public:
  using Error::Error;
};

struct ProviderRequest {
  Task task;
  std::string text;
  std::vector<std::string> label_set;  // empty for the victim/perpetrator task
};

struct ProviderResponse {
  std::string label;  // for the victim/perpetrator task, the annotator's reply text
  std::optional<double> confidence;
  std::string raw;
};

// Label strings a provider may return for a task. The race task may also
// return "None" for articles that mention no racial group.
std::vector<std::string> label_set(Task task);

// Implementations must be safe to call from several threads at once.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string id() const = 0;
  virtual std::string model_version() const = 0;
  virtual ProviderResponse call(const ProviderRequest& request) = 0;
};

// Deterministic offline provider. Answers come from an optional table keyed
// by (task, short_hash(text)); anything else gets a label picked by hashing
// the task, the text and the seed.
class StubProvider : public Provider {
 public:
  struct Key {
    Task task;
    std::string text_hash;
    auto operator<=>(const Key&) const = default;
  };

  explicit StubProvider(std::string id = "stub", std::uint64_t seed = 0);

  // Lines of {"task":..,"text_hash":..,"label":..,"confidence":..}.
  void load_table(const std::filesystem::path& path);
  void set_answer(Task task, std::string_view text, std::string label, std::optional<double> confidence = {});

  std::string id() const override { return id_; }
  std::string model_version() const override { return "stub-1"; }
  ProviderResponse call(const ProviderRequest& request) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::string id_;
  std::uint64_t seed_;
  std::map<Key, ProviderResponse> table_;
  std::atomic<std::size_t> calls_{0};
};

struct HttpProviderConfig {
  std::string id = "http";
  std::string url;  // http:// or https://, including the path
  std::string model;
  std::string api_key_env;  // empty: no Authorization header
  RetryPolicy retry;
  double rate_per_second = 0;
};

// POSTs {"task","text","label_set","model"} as JSON and expects
// {"label": .., "confidence": ..} back.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config, Sleeper sleeper = real_sleeper());

  std::string id() const override { return config_.id; }
  std::string model_version() const override { return config_.model; }
  ProviderResponse call(const ProviderRequest& request) override;

 private:
  HttpProviderConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  Sleeper sleeper_;
  RateLimiter limiter_;
};

struct ProviderSettings {
  std::string name = "stub";  // stub | http
  std::uint64_t seed = 0;
  std::string stub_table;
  HttpProviderConfig http;
};

std::unique_ptr<Provider> make_provider(const ProviderSettings& settings);

}  // namespace biaskit::annotate
