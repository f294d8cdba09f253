#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biaskit/core/date.hpp"
#include "biaskit/core/error.hpp"
#include "biaskit/core/labels.hpp"
#include "biaskit/ingest/corpus.hpp"

namespace biaskit::ingest {

class ParseFailure : public ValidationError {
 public:
  ParseFailure(const std::string& what, std::string fingerprint)
      : ValidationError(what + " (layout " + fingerprint + ")"), fingerprint_(std::move(fingerprint)) {}
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::string fingerprint_;
};

class UnmappedCategory : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Canonical article URLs in page order, archive prefixes stripped,
// duplicates removed. page_url resolves relative links.
std::vector<std::string> parse_category_page(std::string_view html, Venue venue, std::string_view page_url = "");

Category normalize_category(std::string_view raw_section, Venue venue);

struct ImageDenylist {
  int version = 1;
  std::vector<std::string> src_substrings;       // matched against the image URL
  std::vector<std::string> attr_substrings;      // matched against the img class, id and alt
  std::vector<std::string> ancestor_substrings;  // matched against ancestor class and id
  int min_dimension = 0;                         // markup width or height at or below this is chrome
};

ImageDenylist load_denylist(const std::filesystem::path& path);

// config/image_denylist/{nyt,fox}.json under config_dir.
ImageDenylist venue_denylist(const std::filesystem::path& config_dir, Venue venue);

// Content images of an article page. Dimensions come from the markup when
// present (0 otherwise); image_id is the URL hash until bytes are fetched.
std::vector<ImageRef> extract_images(std::string_view article_html, Venue venue, const ImageDenylist& denylist,
                                     std::string_view page_url = "");

struct ParsedArticle {
  std::string title;
  std::string body;  // paragraphs separated by blank lines
  std::optional<Date> publish_date;
};

// Throws ParseFailure when no body text is found.
ParsedArticle parse_article(std::string_view html, Venue venue, std::string_view page_url = "");

// Width and height from PNG, GIF, JPEG or BMP headers.
std::optional<std::pair<int, int>> sniff_image_size(std::string_view bytes);

}  // namespace biaskit::ingest
