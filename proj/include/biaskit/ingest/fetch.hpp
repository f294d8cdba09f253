#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "biaskit/core/date.hpp"
#include "biaskit/core/error.hpp"
#include "biaskit/core/labels.hpp"
#include "biaskit/core/retry.hpp"

namespace biaskit::ingest {

class SnapshotUnavailable : public Error {
 public:
  SnapshotUnavailable(const std::string& what, int status) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct SnapshotRef {
  Venue venue = Venue::NYT;
  Date date;
  std::string section;
  std::string source_url;
  std::string archive_url;
};

inline const Date kCorpusFirstDay{2012, 1, 1};
inline const Date kCorpusLastDay{2022, 12, 31};

inline constexpr std::string_view kDefaultArchiveHost = "https://web.archive.org";

// Section landing page of a venue. A section given as an absolute URL is
// used as is after validation.
std::string section_source_url(Venue venue, std::string_view section);

// One ref per (day, section), days outer. Throws ConfigurationError for a
// malformed section and InvalidInput for days outside 2012-2022.
std::vector<SnapshotRef> build_snapshot_urls(Venue venue, const DateRange& range,
                                             const std::vector<std::string>& sections,
                                             std::string_view archive_host = kDefaultArchiveHost);

std::string archive_url_for(std::string_view archive_host, const Date& date, std::string_view source_url);

struct HttpResponse {
  int status = 0;  // 0: transport failure
  std::string body;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string final_url;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& url) = 0;
};

// Live HTTP(S) GET that follows redirects.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::chrono::milliseconds timeout = std::chrono::seconds(30), std::string user_agent = "biaskit");
  HttpResponse get(const std::string& url) override;

 private:
  std::chrono::milliseconds timeout_;
  std::string user_agent_;
};

// Serves stored files. dir/index.json maps a URL to either
//   {"file": "page.html"}  or
//   {"responses": [{"status": 503, "headers": {..}}, {"status": 200, "file": "page.html"}]}
// where successive requests walk the response list and then repeat its
// last entry. Unknown URLs get 404. Lookups try the exact URL first, then
// the URL with its archive prefix stripped.
class FixtureTransport : public Transport {
 public:
  explicit FixtureTransport(std::filesystem::path dir);
  HttpResponse get(const std::string& url) override;

  std::size_t requests() const { return requests_.load(); }

 private:
  struct Canned {
    int status = 200;
    std::string file;
    std::map<std::string, std::string> headers;
  };

  std::filesystem::path dir_;
  std::map<std::string, std::vector<Canned>> index_;
  std::map<std::string, std::size_t> served_;
  std::mutex mu_;
  std::atomic<std::size_t> requests_{0};
};

struct FetchResult {
  std::string body;
  int status = 0;
  std::string final_url;
  int attempts = 0;
};

// GET with retries. Every non-200 outcome is retried up to the policy cap;
// 429 and 503 replies carrying Retry-After wait that long (capped by
// max_delay), others back off exponentially.
FetchResult fetch_url(Transport& transport, const std::string& url, const RetryPolicy& policy,
                      RateLimiter* limiter = nullptr, const Sleeper& sleeper = real_sleeper());

FetchResult fetch_snapshot(const SnapshotRef& ref, Transport& transport, const RetryPolicy& policy,
                           RateLimiter* limiter = nullptr, const Sleeper& sleeper = real_sleeper());

}  // namespace biaskit::ingest
