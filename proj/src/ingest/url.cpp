#include "biaskit/ingest/url.hpp"

#include <algorithm>
#include <cctype>

#include "biaskit/core/error.hpp"
#include "biaskit/core/hash.hpp"

namespace biaskit::ingest {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == prefix;
}

}  // namespace

UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0)
    throw InvalidInput("URL '" + std::string(url) + "' has no scheme");
  UrlParts p;
  p.scheme = lower(url.substr(0, scheme_end));
  auto rest = url.substr(scheme_end + 3);
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  const auto path_start = rest.find_first_of("/?");
  auto authority = rest.substr(0, path_start);
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    p.port = std::string(authority.substr(colon + 1));
    authority = authority.substr(0, colon);
  }
  p.host = lower(authority);
  if (p.host.empty()) throw InvalidInput("URL '" + std::string(url) + "' has no host");
  for (char c : p.host)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-'))
      throw InvalidInput("URL '" + std::string(url) + "' has an invalid host");
  if (path_start == std::string_view::npos) {
    p.path = "/";
    return p;
  }
  auto tail = rest.substr(path_start);
  const auto q = tail.find('?');
  p.path = std::string(tail.substr(0, q));
  if (p.path.empty()) p.path = "/";
  if (q != std::string_view::npos) p.query = std::string(tail.substr(q + 1));
  return p;
}

std::vector<std::string> default_tracking_params() {
  return {"smid", "smtyp", "cmpid", "ref", "partner", "src", "mod", "intcmp", "fbclid", "gclid", "_r",
          "action", "module", "pgtype", "region", "emc", "nl", "campaign_id", "ocid"};
}

std::string canonical_url(std::string_view url, const std::vector<std::string>& tracking_params) {
  auto p = split_url(url);
  if (p.scheme != "http" && p.scheme != "https") throw InvalidInput("URL '" + std::string(url) + "' is not http(s)");
  std::string out = "https://" + p.host;
  if (!p.port.empty() && p.port != "80" && p.port != "443") out += ":" + p.port;
  std::string path = p.path;
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  out += path;

  std::string query;
  std::size_t pos = 0;
  while (pos <= p.query.size() && !p.query.empty()) {
    auto amp = p.query.find('&', pos);
    if (amp == std::string::npos) amp = p.query.size();
    const auto item = std::string_view(p.query).substr(pos, amp - pos);
    const auto key = lower(item.substr(0, item.find('=')));
    const bool tracking = key.rfind("utm_", 0) == 0 ||
                          std::find(tracking_params.begin(), tracking_params.end(), key) != tracking_params.end();
    if (!item.empty() && !tracking) {
      query += query.empty() ? "?" : "&";
      query += item;
    }
    pos = amp + 1;
  }
  return out + query;
}

std::string article_id_for(std::string_view canonical) { return short_hash(canonical); }

std::string strip_archive_prefix(std::string_view url) {
  auto pos = url.find("/web/");
  if (pos == std::string_view::npos) return std::string(url);
  pos += 5;
  auto end = pos;
  while (end < url.size() && std::isdigit(static_cast<unsigned char>(url[end]))) ++end;
  if (end == pos) return std::string(url);
  while (end < url.size() && (std::isalpha(static_cast<unsigned char>(url[end])) || url[end] == '_')) ++end;
  if (end >= url.size() || url[end] != '/') return std::string(url);
  auto original = url.substr(end + 1);
  if (starts_with_ci(original, "http:/") && !starts_with_ci(original, "http://"))
    return "http://" + std::string(original.substr(6));
  if (starts_with_ci(original, "https:/") && !starts_with_ci(original, "https://"))
    return "https://" + std::string(original.substr(7));
  return std::string(original);
}

std::optional<std::string> resolve_url(std::string_view base, std::string_view href) {
  while (!href.empty() && std::isspace(static_cast<unsigned char>(href.front()))) href.remove_prefix(1);
  while (!href.empty() && std::isspace(static_cast<unsigned char>(href.back()))) href.remove_suffix(1);
  if (href.empty() || href.front() == '#') return std::nullopt;
  if (starts_with_ci(href, "http://") || starts_with_ci(href, "https://")) return std::string(href);
  const auto colon = href.find(':');
  const auto slash = href.find('/');
  if (colon != std::string_view::npos && (slash == std::string_view::npos || colon < slash)) return std::nullopt;
  const auto b = split_url(base);
  const std::string origin = b.scheme + "://" + b.host + (b.port.empty() ? "" : ":" + b.port);
  if (href.substr(0, 2) == "//") return b.scheme + ":" + std::string(href);
  if (href.front() == '/') return origin + std::string(href);
  const auto dir = b.path.substr(0, b.path.rfind('/') + 1);
  return origin + dir + std::string(href);
}

}  // namespace biaskit::ingest
