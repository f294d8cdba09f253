#include "biaskit/annotate/provider.hpp"

#include <algorithm>
#include <cstdlib>
#include <fmt/core.h>
#include <fstream>
#include <httplib.h>

#include "biaskit/annotate/prompt.hpp"
#include "biaskit/core/hash.hpp"

namespace biaskit::annotate {

using nlohmann::json;

namespace {

template <Labeled E>
std::vector<std::string> names_of() {
  std::vector<std::string> out;
  for (auto n : LabelTraits<E>::names) out.emplace_back(n);
  return out;
}

std::uint64_t hash64(std::string_view s) { return std::stoull(short_hash(s), nullptr, 16); }

}  // namespace

std::vector<std::string> label_set(Task task) {
  switch (task) {
    case Task::Emotion: return names_of<Emotion>();
    case Task::Sentiment: return names_of<Sentiment>();
    case Task::Topic: return names_of<Topic>();
    case Task::Race: return names_of<Race6>();
    case Task::VictimPerp: return {};
  }
  return {};
}

StubProvider::StubProvider(std::string id, std::uint64_t seed) : id_(std::move(id)), seed_(seed) {}

void StubProvider::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open stub answer table " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      ProviderResponse r;
      r.label = j.at("label").get<std::string>();
      if (j.contains("confidence") && !j["confidence"].is_null()) r.confidence = j["confidence"].get<double>();
      r.raw = r.label;
      table_[Key{task_from_string(j.at("task").get<std::string>()), j.at("text_hash").get<std::string>()}] =
          std::move(r);
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
}

void StubProvider::set_answer(Task task, std::string_view text, std::string label, std::optional<double> confidence) {
  ProviderResponse r{label, confidence, label};
  table_[Key{task, short_hash(text)}] = std::move(r);
}

ProviderResponse StubProvider::call(const ProviderRequest& request) {
  ++calls_;
  if (!table_.empty()) {
    auto it = table_.find(Key{request.task, short_hash(request.text)});
    if (it != table_.end()) return it->second;
  }
  const std::uint64_t h = hash64(fmt::format("{}|{}|{}", to_string(request.task), seed_, request.text));
  ProviderResponse r;
  if (request.task == Task::VictimPerp) {
    VictimPerpRecord vp{static_cast<VpRole>(h % kVpRoleCount), static_cast<VpRole>((h / kVpRoleCount) % kVpRoleCount)};
    r.label = "Answer: " + format_vp_response(vp);
  } else if (request.task == Task::Race && (h >> 32) % 2 == 0) {
    r.label = "None";
  } else {
    r.label = request.label_set.at(h % request.label_set.size());
    if (request.task == Task::Race) r.confidence = 0.5 + static_cast<double>((h >> 40) % 500) / 1000.0;
  }
  r.raw = r.label;
  return r;
}

HttpProvider::HttpProvider(HttpProviderConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(sleeper), limiter_(config_.rate_per_second, sleeper) {
  const auto scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos) throw ConfigurationError("provider url '" + config_.url + "' lacks a scheme");
  const auto path_start = config_.url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
      throw ConfigurationError("environment variable " + config_.api_key_env + " holding the provider API key is unset");
    api_key_ = key;
  }
}

ProviderResponse HttpProvider::call(const ProviderRequest& request) {
  const json body = {{"task", std::string(to_string(request.task))},
                     {"text", request.text},
                     {"label_set", request.label_set},
                     {"model", config_.model}};
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_error;
  for (int attempt = 0; attempt < config_.retry.max_attempts; ++attempt) {
    limiter_.acquire(scheme_host_port_);
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.retry.timeout);
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    client.set_write_timeout(secs);
    auto res = client.Post(path_, headers, payload, "application/json");
    auto delay = backoff_delay(config_.retry, attempt);
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      ProviderResponse out;
      out.raw = res->body;
      json j;
      try {
        j = json::parse(res->body);
      } catch (const json::exception&) {
        throw MalformedAnnotation("provider reply is not JSON", res->body);
      }
      if (!j.is_object() || !j.contains("label") || !j["label"].is_string())
        throw MalformedAnnotation("provider reply lacks a string 'label'", res->body);
      out.label = j["label"].get<std::string>();
      if (j.contains("confidence") && j["confidence"].is_number()) out.confidence = j["confidence"].get<double>();
      return out;
    } else if (res->status == 429 || res->status >= 500) {
      last_error = fmt::format("HTTP {}", res->status);
      if (res->has_header("Retry-After")) {
        try {
          delay = std::min<std::chrono::milliseconds>(std::chrono::seconds(std::stol(res->get_header_value("Retry-After"))),
                                                      config_.retry.max_delay);
        } catch (const std::exception&) {
        }
      }
    } else {
      throw AnnotationUnavailable(fmt::format("provider {} refused the request: HTTP {}", config_.id, res->status));
    }
    if (attempt + 1 < config_.retry.max_attempts) sleeper_(delay);
  }
  throw AnnotationUnavailable(
      fmt::format("provider {} failed after {} attempts: {}", config_.id, config_.retry.max_attempts, last_error));
}

std::unique_ptr<Provider> make_provider(const ProviderSettings& settings) {
  if (settings.name == "stub") {
    auto p = std::make_unique<StubProvider>("stub", settings.seed);
    if (!settings.stub_table.empty()) p->load_table(settings.stub_table);
    return p;
  }
  if (settings.name == "http") return std::make_unique<HttpProvider>(settings.http);
  throw ConfigurationError("unknown provider '" + settings.name + "' (expected stub or http)");
}

}  // namespace biaskit::annotate
