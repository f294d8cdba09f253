#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "biaskit/core/date.hpp"
#include "biaskit/core/labels.hpp"

namespace biaskit::ingest {

struct ImageRef {
  std::string image_id;  // content hash once fetched, URL hash otherwise
  std::string source_url;
  int width_px = 0;
  int height_px = 0;
  std::string bytes_path;  // relative to the corpus root; empty when unfetched
  bool fetched = false;

  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

struct ArticleRecord {
  std::string article_id;
  Venue venue = Venue::NYT;
  Category category = Category::Art;
  Date publish_date;
  std::string title;
  std::string body;
  std::string url;  // canonical
  std::vector<ImageRef> image_refs;

  friend bool operator==(const ArticleRecord&, const ArticleRecord&) = default;
};

nlohmann::json to_json(const ImageRef& r);
nlohmann::json to_json(const ArticleRecord& r);
ImageRef image_ref_from_json(const nlohmann::json& j);
// Throws FormatError on missing fields, an empty body or out-of-set labels.
ArticleRecord article_from_json(const nlohmann::json& j);

struct DedupResult {
  std::vector<ArticleRecord> records;
  std::size_t dropped = 0;
};

// First occurrence of each article_id wins; order is otherwise preserved.
DedupResult dedup_articles(std::vector<ArticleRecord> records);

// Layout under root:
//   corpus/{venue}/{year}/{article_id}.json
//   images/{image_id}
//   manifest.json
class CorpusStore {
 public:
  explicit CorpusStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path article_path(const ArticleRecord& r) const;

  bool contains(const ArticleRecord& r) const;
  // Returns false, leaving the stored copy untouched, when the article exists.
  bool put_article(const ArticleRecord& r);
  // Returns the relative bytes path.
  std::string put_image(const std::string& image_id, std::string_view bytes);

  // All stored articles ordered by venue, year and article_id.
  std::vector<ArticleRecord> load() const;

  // Rewrites manifest.json from the stored articles and returns it.
  nlohmann::json write_manifest() const;

 private:
  std::filesystem::path root_;
};

std::vector<ArticleRecord> load_corpus(const std::filesystem::path& root);

}  // namespace biaskit::ingest
