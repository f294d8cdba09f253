#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biaskit::ingest {

struct UrlParts {
  std::string scheme;
  std::string host;
  std::string port;  // empty when absent
  std::string path;  // starts with '/'
  std::string query;  // without '?'
};

// Throws InvalidInput for strings without scheme://host.
UrlParts split_url(std::string_view url);

std::vector<std::string> default_tracking_params();

// https, lowercased host, default port dropped, fragment dropped, tracking
// query parameters (any utm_* plus the given names) removed, trailing slash
// removed. http and https spellings of one page canonicalize identically.
std::string canonical_url(std::string_view url, const std::vector<std::string>& tracking_params = default_tracking_params());

std::string article_id_for(std::string_view canonical);

// ".../web/20150301123456/https://host/x" -> "https://host/x". Other URLs
// are returned unchanged.
std::string strip_archive_prefix(std::string_view url);

// Absolute form of href relative to base. nullopt for fragments, mailto:,
// javascript: and other non-http links.
std::optional<std::string> resolve_url(std::string_view base, std::string_view href);

}  // namespace biaskit::ingest
