#include "biaskit/ingest/fetch.hpp"

#include <algorithm>
#include <cctype>
#include <fmt/core.h>
#include <httplib.h>
#include <json.hpp>

#include "biaskit/core/files.hpp"
#include "biaskit/ingest/url.hpp"

namespace biaskit::ingest {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool valid_section_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '/')) return false;
  return s.front() != '/' && s.back() != '/';
}

}  // namespace

std::string section_source_url(Venue venue, std::string_view section) {
  if (section.find("://") != std::string_view::npos) {
    try {
      const auto p = split_url(section);
      if (p.scheme != "http" && p.scheme != "https") throw InvalidInput("not http");
    } catch (const InvalidInput&) {
      throw ConfigurationError("malformed section URL '" + std::string(section) + "'");
    }
    return std::string(section);
  }
  if (!valid_section_name(section)) throw ConfigurationError("malformed section name '" + std::string(section) + "'");
  const std::string s = lower(section);
  return venue == Venue::NYT ? "https://www.nytimes.com/section/" + s : "https://www.foxnews.com/" + s;
}

std::string archive_url_for(std::string_view archive_host, const Date& date, std::string_view source_url) {
  std::string host(archive_host);
  while (!host.empty() && host.back() == '/') host.pop_back();
  return host + "/web/" + date.compact() + "/" + std::string(source_url);
}

std::vector<SnapshotRef> build_snapshot_urls(Venue venue, const DateRange& range,
                                             const std::vector<std::string>& sections, std::string_view archive_host) {
  if (sections.empty()) throw ConfigurationError("no sections given");
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto& s : sections) sources.emplace_back(s, section_source_url(venue, s));
  std::vector<SnapshotRef> out;
  if (range.empty()) return out;
  if (range.first < kCorpusFirstDay || kCorpusLastDay < range.last)
    throw InvalidInput(fmt::format("date range {}..{} is outside {}..{}", range.first.iso(), range.last.iso(),
                                   kCorpusFirstDay.iso(), kCorpusLastDay.iso()));
  out.reserve(static_cast<std::size_t>(range.day_count()) * sources.size());
  for (Date d = range.first; d <= range.last; d = d.plus_days(1))
    for (const auto& [section, url] : sources)
      out.push_back(SnapshotRef{venue, d, section, url, archive_url_for(archive_host, d, url)});
  return out;
}

HttpTransport::HttpTransport(std::chrono::milliseconds timeout, std::string user_agent)
    : timeout_(timeout), user_agent_(std::move(user_agent)) {}

HttpResponse HttpTransport::get(const std::string& url) {
  HttpResponse out;
  UrlParts p;
  try {
    p = split_url(url);
  } catch (const InvalidInput& e) {
    out.error = e.what();
    return out;
  }
  const std::string origin = p.scheme + "://" + p.host + (p.port.empty() ? "" : ":" + p.port);
  httplib::Client client(origin);
  client.set_follow_location(true);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  const std::string target = p.path + (p.query.empty() ? "" : "?" + p.query);
  auto res = client.Get(target, httplib::Headers{{"User-Agent", user_agent_}});
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  for (const auto& [k, v] : res->headers) out.headers[lower(k)] = v;
  out.final_url = res->location.empty() ? url : res->location;
  return out;
}

FixtureTransport::FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
  const auto index_path = dir_ / "index.json";
  json index;
  try {
    index = json::parse(read_file(index_path));
  } catch (const json::exception& e) {
    throw FormatError(index_path.string() + ": " + e.what());
  }
  for (const auto& [url, entry] : index.items()) {
    std::vector<Canned> seq;
    auto read_one = [&](const json& j) {
      Canned c;
      c.status = j.value("status", 200);
      c.file = j.value("file", "");
      if (j.contains("headers"))
        for (const auto& [k, v] : j["headers"].items()) c.headers[lower(k)] = v.get<std::string>();
      return c;
    };
    if (entry.is_string()) {
      seq.push_back(Canned{200, entry.get<std::string>(), {}});
    } else if (entry.contains("responses")) {
      for (const auto& r : entry["responses"]) seq.push_back(read_one(r));
    } else {
      seq.push_back(read_one(entry));
    }
    if (seq.empty()) throw FormatError(index_path.string() + ": empty response list for " + url);
    index_[url] = std::move(seq);
  }
}

HttpResponse FixtureTransport::get(const std::string& url) {
  ++requests_;
  Canned canned;
  std::string key = url;
  {
    std::lock_guard lock(mu_);
    auto it = index_.find(url);
    if (it == index_.end()) {
      key = strip_archive_prefix(url);
      it = index_.find(key);
    }
    if (it == index_.end()) {
      HttpResponse r;
      r.status = 404;
      r.final_url = url;
      return r;
    }
    auto& n = served_[key];
    canned = it->second[std::min(n, it->second.size() - 1)];
    ++n;
  }
  HttpResponse r;
  r.status = canned.status;
  r.headers = canned.headers;
  r.final_url = url;
  if (!canned.file.empty()) r.body = read_file(dir_ / canned.file);
  return r;
}

FetchResult fetch_url(Transport& transport, const std::string& url, const RetryPolicy& policy, RateLimiter* limiter,
                      const Sleeper& sleeper) {
  HttpResponse last;
  const int attempts = std::max(1, policy.max_attempts);
  std::string host;
  try {
    host = split_url(url).host;
  } catch (const InvalidInput&) {
    throw SnapshotUnavailable("cannot fetch malformed URL '" + url + "'", 0);
  }
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (limiter != nullptr) limiter->acquire(host);
    last = transport.get(url);
    if (last.status == 200) return FetchResult{std::move(last.body), 200, last.final_url, attempt + 1};
    if (attempt + 1 == attempts) break;
    auto delay = backoff_delay(policy, attempt);
    if (last.status == 429 || last.status == 503) {
      if (auto it = last.headers.find("retry-after"); it != last.headers.end()) {
        try {
          delay = std::min<std::chrono::milliseconds>(std::chrono::seconds(std::stol(it->second)), policy.max_delay);
        } catch (const std::exception&) {
        }
      }
    }
    sleeper(delay);
  }
  throw SnapshotUnavailable(fmt::format("{}: {} after {} attempts", url,
                                        last.status == 0 ? "transport error " + last.error
                                                         : fmt::format("HTTP {}", last.status),
                                        attempts),
                            last.status);
}

FetchResult fetch_snapshot(const SnapshotRef& ref, Transport& transport, const RetryPolicy& policy,
                           RateLimiter* limiter, const Sleeper& sleeper) {
  return fetch_url(transport, ref.archive_url, policy, limiter, sleeper);
}

}  // namespace biaskit::ingest
