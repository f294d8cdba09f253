#include "biaskit/ingest/corpus.hpp"

#include <algorithm>
#include <fmt/core.h>
#include <set>
#include <tuple>

#include "biaskit/core/error.hpp"
#include "biaskit/core/files.hpp"
#include "biaskit/core/hash.hpp"

namespace biaskit::ingest {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const ImageRef& r) {
  return json{{"image_id", r.image_id},     {"source_url", r.source_url}, {"width_px", r.width_px},
              {"height_px", r.height_px},   {"bytes_path", r.bytes_path}, {"fetched", r.fetched}};
}

json to_json(const ArticleRecord& r) {
  json images = json::array();
  for (const auto& i : r.image_refs) images.push_back(to_json(i));
  return json{{"article_id", r.article_id},
              {"venue", std::string(to_string(r.venue))},
              {"category", std::string(to_string(r.category))},
              {"publish_date", r.publish_date.iso()},
              {"title", r.title},
              {"body", r.body},
              {"url", r.url},
              {"image_refs", images}};
}

ImageRef image_ref_from_json(const json& j) {
  try {
    ImageRef r;
    r.image_id = j.at("image_id").get<std::string>();
    r.source_url = j.at("source_url").get<std::string>();
    r.width_px = j.value("width_px", 0);
    r.height_px = j.value("height_px", 0);
    r.bytes_path = j.value("bytes_path", "");
    r.fetched = j.value("fetched", false);
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("image ref: ") + e.what());
  }
}

ArticleRecord article_from_json(const json& j) {
  ArticleRecord r;
  try {
    r.article_id = j.at("article_id").get<std::string>();
    r.venue = label_from_string<Venue>(j.at("venue").get<std::string>());
    r.category = label_from_string<Category>(j.at("category").get<std::string>());
    r.publish_date = Date::parse(j.at("publish_date").get<std::string>());
    r.title = j.value("title", "");
    r.body = j.at("body").get<std::string>();
    r.url = j.value("url", "");
    for (const auto& i : j.value("image_refs", json::array())) r.image_refs.push_back(image_ref_from_json(i));
  } catch (const json::exception& e) {
    throw FormatError(std::string("article record: ") + e.what());
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("article record: ") + e.what());
  }
  if (r.article_id.empty()) throw FormatError("article record without article_id");
  if (r.body.empty()) throw FormatError("article " + r.article_id + " has an empty body");
  return r;
}

DedupResult dedup_articles(std::vector<ArticleRecord> records) {
  DedupResult out;
  std::set<std::string> seen;
  for (auto& r : records) {
    if (seen.insert(r.article_id).second) out.records.push_back(std::move(r));
    else ++out.dropped;
  }
  return out;
}

CorpusStore::CorpusStore(fs::path root) : root_(std::move(root)) {}

fs::path CorpusStore::article_path(const ArticleRecord& r) const {
  return root_ / "corpus" / venue_key(r.venue) / std::to_string(r.publish_date.year()) / (r.article_id + ".json");
}

bool CorpusStore::contains(const ArticleRecord& r) const { return fs::exists(article_path(r)); }

bool CorpusStore::put_article(const ArticleRecord& r) {
  const auto path = article_path(r);
  if (fs::exists(path)) return false;
  write_file_atomic(path, to_json(r).dump(2) + "\n");
  return true;
}

std::string CorpusStore::put_image(const std::string& image_id, std::string_view bytes) {
  const std::string rel = "images/" + image_id;
  const auto path = root_ / rel;
  if (!fs::exists(path)) write_file_atomic(path, bytes);
  return rel;
}

std::vector<ArticleRecord> CorpusStore::load() const {
  std::vector<fs::path> files;
  const auto base = root_ / "corpus";
  if (!fs::exists(base)) return {};
  for (const auto& e : fs::recursive_directory_iterator(base))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<ArticleRecord> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    try {
      out.push_back(article_from_json(json::parse(read_file(f))));
    } catch (const json::exception& e) {
      throw FormatError(f.string() + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(f.string() + ": " + e.what());
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ArticleRecord& a, const ArticleRecord& b) {
    return std::tuple(index_of(a.venue), a.publish_date.year(), a.article_id) <
           std::tuple(index_of(b.venue), b.publish_date.year(), b.article_id);
  });
  return out;
}

json CorpusStore::write_manifest() const {
  const auto records = load();
  json m;
  m["total"] = records.size();
  json counts = json::object();
  json list = json::array();
  std::set<std::string> images;
  for (const auto& r : records) {
    const std::string v(to_string(r.venue));
    const std::string c(to_string(r.category));
    const std::string y = std::to_string(r.publish_date.year());
    auto& cell = counts[v][c][y];
    cell = cell.is_null() ? 1 : cell.get<int>() + 1;
    const auto rel = fs::relative(article_path(r), root_).generic_string();
    list.push_back({{"article_id", r.article_id}, {"venue", v}, {"category", c}, {"year", r.publish_date.year()},
                    {"path", rel}, {"sha256", sha256_file(article_path(r))}});
    for (const auto& i : r.image_refs)
      if (i.fetched) images.insert(i.image_id);
  }
  m["counts"] = counts;
  m["images"] = images.size();
  m["records"] = list;
  write_file_atomic(root_ / "manifest.json", m.dump(2) + "\n");
  return m;
}

std::vector<ArticleRecord> load_corpus(const fs::path& root) {
  if (!fs::exists(root / "corpus")) throw InvalidInput("no corpus under " + root.string());
  return CorpusStore(root).load();
}

}  // namespace biaskit::ingest
