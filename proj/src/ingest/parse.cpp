#include "biaskit/ingest/parse.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fmt/core.h>
#include <json.hpp>
#include <set>

#include "biaskit/core/files.hpp"
#include "biaskit/core/hash.hpp"
#include "biaskit/ingest/html.hpp"
#include "biaskit/ingest/url.hpp"

namespace biaskit::ingest {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool host_is(const std::string& host, std::string_view domain) {
  return host == domain || ends_with(host, "." + std::string(domain));
}

std::string collapse_space(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

std::string meta_content(const HtmlNode& root, std::string_view key) {
  for (const auto* m : find_all(root, "meta"))
    if (m->attr("property") == key || m->attr("name") == key || m->attr("itemprop") == key) return m->attr("content");
  return {};
}

std::optional<Venue> detect_venue(const HtmlNode& root) {
  const auto site = lower(meta_content(root, "og:site_name"));
  if (site == "the new york times") return Venue::NYT;
  if (site == "fox news") return Venue::FOX;
  return std::nullopt;
}

bool has_elements(const HtmlNode& root) {
  bool any = false;
  visit(root, [&](const HtmlNode& n) { any = any || !n.tag.empty(); });
  return any;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> path_segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    auto slash = path.find('/', pos);
    if (slash == std::string_view::npos) slash = path.size();
    if (slash > pos) out.emplace_back(path.substr(pos, slash - pos));
    pos = slash + 1;
  }
  return out;
}

std::optional<Date> date_in_path(const std::vector<std::string>& seg) {
  for (std::size_t i = 0; i + 2 < seg.size(); ++i) {
    if (seg[i].size() == 4 && all_digits(seg[i]) && seg[i + 1].size() == 2 && all_digits(seg[i + 1]) &&
        seg[i + 2].size() == 2 && all_digits(seg[i + 2])) {
      try {
        return Date::parse(seg[i] + "-" + seg[i + 1] + "-" + seg[i + 2]);
      } catch (const InvalidInput&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

bool is_nyt_article(const UrlParts& u) {
  if (!host_is(u.host, "nytimes.com")) return false;
  std::string_view path = u.path;
  while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
  return date_in_path(path_segments(path)).has_value() && ends_with(path, ".html");
}

bool is_fox_article(const UrlParts& u) {
  static const std::set<std::string> kNonArticle{"category", "video",  "shows", "person", "tag", "about",
                                                 "apps-products", "newsletters", "topics", "media", "sitemap"};
  if (!host_is(u.host, "foxnews.com")) return false;
  const auto seg = path_segments(u.path);
  if (seg.size() < 2 || kNonArticle.count(seg.front())) return false;
  const auto& slug = seg.back();
  return std::count(slug.begin(), slug.end(), '-') >= 2;
}

std::string default_base(Venue v) { return v == Venue::NYT ? "https://www.nytimes.com/" : "https://www.foxnews.com/"; }

std::optional<UrlParts> absolute_parts(std::string_view base, const std::string& href) {
  auto resolved = resolve_url(base, href);
  if (!resolved) return std::nullopt;
  try {
    return split_url(strip_archive_prefix(*resolved));
  } catch (const InvalidInput&) {
    return std::nullopt;
  }
}

int dimension_attr(const std::string& s) {
  if (s.empty() || !std::isdigit(static_cast<unsigned char>(s.front()))) return 0;
  std::size_t i = 0;
  long v = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) && v < 1000000) v = v * 10 + (s[i++] - '0');
  const auto rest = s.substr(i);
  if (!rest.empty() && rest != "px") return 0;
  return static_cast<int>(v);
}

bool contains_any(const std::string& hay, const std::vector<std::string>& needles) {
  const auto h = lower(hay);
  return std::any_of(needles.begin(), needles.end(), [&](const std::string& n) { return !n.empty() && h.find(lower(n)) != std::string::npos; });
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key))
    for (const auto& v : j[key]) out.push_back(v.get<std::string>());
  return out;
}

const HtmlNode* find_body_container(const HtmlNode& root, Venue venue) {
  const HtmlNode* found = nullptr;
  visit(root, [&](const HtmlNode& n) {
    if (found) return;
    if (venue == Venue::NYT && n.tag == "section" && n.attr("name") == "articleBody") found = &n;
    if (venue == Venue::FOX && n.tag == "div" && n.has_class("article-body")) found = &n;
  });
  if (found) return found;
  auto articles = find_all(root, "article");
  return articles.empty() ? nullptr : articles.front();
}

std::uint32_t be16(std::string_view b, std::size_t i) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << 8) | static_cast<unsigned char>(b[i + 1]);
}
std::uint32_t be32(std::string_view b, std::size_t i) { return (be16(b, i) << 16) | be16(b, i + 2); }
std::uint32_t le16(std::string_view b, std::size_t i) {
  return static_cast<unsigned char>(b[i]) | (static_cast<std::uint32_t>(static_cast<unsigned char>(b[i + 1])) << 8);
}
std::uint32_t le32(std::string_view b, std::size_t i) { return le16(b, i) | (le16(b, i + 2) << 16); }

}  // namespace

std::vector<std::string> parse_category_page(std::string_view html, Venue venue, std::string_view page_url) {
  const auto root = parse_html(html);
  if (!has_elements(*root)) return {};
  const auto detected = detect_venue(*root);
  if (!detected || *detected != venue)
    throw ParseFailure(fmt::format("unrecognized {} category page layout", to_string(venue)), layout_fingerprint(*root));
  const std::string base = page_url.empty() ? default_base(venue) : strip_archive_prefix(page_url);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto* a : find_all(*root, "a")) {
    auto parts = absolute_parts(base, a->attr("href"));
    if (!parts) continue;
    if (!(venue == Venue::NYT ? is_nyt_article(*parts) : is_fox_article(*parts))) continue;
    const std::string url = parts->scheme + "://" + parts->host + (parts->port.empty() ? "" : ":" + parts->port) +
                            parts->path + (parts->query.empty() ? "" : "?" + parts->query);
    auto canon = canonical_url(url);
    if (seen.insert(canon).second) out.push_back(std::move(canon));
  }
  return out;
}

Category normalize_category(std::string_view raw_section, Venue venue) {
  std::string key = fold_label(raw_section);
  if (const auto slash = key.rfind('/'); slash != std::string::npos) key = key.substr(slash + 1);
  if (key == "lifestyle") return Category::Art;
  if (venue == Venue::FOX && key == "entertainment") return Category::Art;
  if (venue == Venue::NYT && key == "arts") return Category::Art;
  if (key == "sports") return Category::Sport;
  if (key == "tech") return Category::Technology;
  if (auto c = parse_label<Category>(key)) return *c;
  throw UnmappedCategory(fmt::format("section '{}' of {} has no category mapping", raw_section, to_string(venue)));
}

ImageDenylist load_denylist(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
    ImageDenylist d;
    d.version = j.value("version", 1);
    d.src_substrings = string_list(j, "src_substrings");
    d.attr_substrings = string_list(j, "attr_substrings");
    d.ancestor_substrings = string_list(j, "ancestor_substrings");
    d.min_dimension = j.value("min_dimension", 0);
    return d;
  } catch (const json::exception& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
}

ImageDenylist venue_denylist(const std::filesystem::path& config_dir, Venue venue) {
  return load_denylist(config_dir / "image_denylist" / (venue_key(venue) + ".json"));
}

std::vector<ImageRef> extract_images(std::string_view article_html, Venue venue, const ImageDenylist& denylist,
                                     std::string_view page_url) {
  const auto root = parse_html(article_html);
  const std::string base = page_url.empty() ? default_base(venue) : strip_archive_prefix(page_url);
  std::vector<ImageRef> out;
  std::set<std::string> seen;
  for (const auto* img : find_all(*root, "img")) {
    std::string src = img->attr("src");
    if (src.empty() || src.rfind("data:", 0) == 0) src = img->attr("data-src");
    auto parts = absolute_parts(base, src);
    if (!parts) continue;
    const std::string url = parts->scheme + "://" + parts->host + (parts->port.empty() ? "" : ":" + parts->port) +
                            parts->path + (parts->query.empty() ? "" : "?" + parts->query);
    if (contains_any(url, denylist.src_substrings)) continue;
    if (contains_any(img->attr("class") + " " + img->attr("id") + " " + img->attr("alt"), denylist.attr_substrings))
      continue;
    bool chrome = false;
    for (const HtmlNode* p = img->parent; p != nullptr && !chrome; p = p->parent)
      chrome = !p->tag.empty() &&
               (contains_any(p->attr("class") + " " + p->attr("id"), denylist.ancestor_substrings) ||
                std::find(denylist.ancestor_substrings.begin(), denylist.ancestor_substrings.end(), "<" + p->tag + ">") !=
                    denylist.ancestor_substrings.end());
    if (chrome) continue;
    const int w = dimension_attr(img->attr("width"));
    const int h = dimension_attr(img->attr("height"));
    if ((w > 0 && w <= denylist.min_dimension) || (h > 0 && h <= denylist.min_dimension)) continue;
    const auto canon = canonical_url(url, {});
    if (!seen.insert(canon).second) continue;
    ImageRef r;
    r.source_url = url;
    r.image_id = short_hash(canon);
    r.width_px = w > 0 && h > 0 ? w : 0;
    r.height_px = w > 0 && h > 0 ? h : 0;
    out.push_back(std::move(r));
  }
  return out;
}

ParsedArticle parse_article(std::string_view html, Venue venue, std::string_view page_url) {
  const auto root = parse_html(html);
  ParsedArticle out;
  out.title = collapse_space(meta_content(*root, "og:title"));
  if (out.title.empty()) {
    auto h1 = find_all(*root, "h1");
    if (!h1.empty()) out.title = collapse_space(h1.front()->text_content());
  }
  if (out.title.empty()) {
    auto t = find_all(*root, "title");
    if (!t.empty()) out.title = collapse_space(t.front()->text_content());
  }
  if (const auto* container = find_body_container(*root, venue)) {
    for (const auto* p : find_all(*container, "p")) {
      const auto text = collapse_space(p->text_content());
      if (text.empty()) continue;
      if (!out.body.empty()) out.body += "\n\n";
      out.body += text;
    }
  }
  if (out.body.empty()) throw ParseFailure(fmt::format("no {} article body found", to_string(venue)), layout_fingerprint(*root));

  std::string published = meta_content(*root, "article:published_time");
  if (published.empty()) published = meta_content(*root, "datePublished");
  if (published.empty()) {
    auto times = find_all(*root, "time");
    if (!times.empty()) published = times.front()->attr("datetime");
  }
  if (published.size() >= 10) {
    try {
      out.publish_date = Date::parse(published.substr(0, 10));
    } catch (const InvalidInput&) {
    }
  }
  if (!out.publish_date && !page_url.empty()) {
    try {
      out.publish_date = date_in_path(path_segments(split_url(strip_archive_prefix(page_url)).path));
    } catch (const InvalidInput&) {
    }
  }
  return out;
}

std::optional<std::pair<int, int>> sniff_image_size(std::string_view b) {
  auto ok = [](std::uint32_t w, std::uint32_t h) -> std::optional<std::pair<int, int>> {
    if (w == 0 || h == 0 || w > 1u << 20 || h > 1u << 20) return std::nullopt;
    return std::pair<int, int>(static_cast<int>(w), static_cast<int>(h));
  };
  if (b.size() >= 24 && b.substr(0, 8) == std::string_view("\x89PNG\r\n\x1a\n", 8) && b.substr(12, 4) == "IHDR")
    return ok(be32(b, 16), be32(b, 20));
  if (b.size() >= 10 && (b.substr(0, 6) == "GIF87a" || b.substr(0, 6) == "GIF89a")) return ok(le16(b, 6), le16(b, 8));
  if (b.size() >= 26 && b.substr(0, 2) == "BM") {
    const auto h = static_cast<std::int32_t>(le32(b, 22));
    return ok(le32(b, 18), static_cast<std::uint32_t>(h < 0 ? -h : h));
  }
  if (b.size() >= 4 && static_cast<unsigned char>(b[0]) == 0xFF && static_cast<unsigned char>(b[1]) == 0xD8) {
    std::size_t i = 2;
    while (i + 4 <= b.size()) {
      if (static_cast<unsigned char>(b[i]) != 0xFF) return std::nullopt;
      const auto marker = static_cast<unsigned char>(b[i + 1]);
      if (marker == 0xFF) {
        ++i;
        continue;
      }
      if (marker == 0xD8 || marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
        i += 2;
        continue;
      }
      const auto len = be16(b, i + 2);
      const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
      if (sof) {
        if (i + 9 > b.size()) return std::nullopt;
        return ok(be16(b, i + 7), be16(b, i + 5));
      }
      if (len < 2) return std::nullopt;
      i += 2 + len;
    }
  }
  return std::nullopt;
}

}  // namespace biaskit::ingest
