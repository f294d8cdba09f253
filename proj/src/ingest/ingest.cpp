#include "biaskit/ingest/ingest.hpp"

#include <map>
#include <optional>
#include <set>

#include "biaskit/core/hash.hpp"
#include "biaskit/core/log.hpp"
#include "biaskit/core/parallel.hpp"
#include "biaskit/ingest/url.hpp"

namespace biaskit::ingest {

namespace {

struct Candidate {
  std::string url;
  std::string article_id;
  Category category;
  Date seen_on;
};

struct FetchedImage {
  ImageRef ref;
  std::string bytes;
};

struct FetchedArticle {
  std::optional<ParsedArticle> parsed;
  std::vector<FetchedImage> images;
};

}  // namespace

IngestReport run_ingest(const IngestConfig& config, Transport& transport, const Sleeper& sleeper) {
  IngestReport report;
  const auto refs = build_snapshot_urls(config.venue, config.range, config.sections, config.archive_host);
  report.snapshots = refs.size();
  std::map<std::string, Category> section_category;
  for (const auto& s : config.sections) section_category.emplace(s, normalize_category(s, config.venue));
  const auto denylist = venue_denylist(config.config_dir, config.venue);
  RateLimiter limiter(config.rate_per_second, sleeper);

  std::vector<std::optional<std::vector<std::string>>> links(refs.size());
  std::vector<int> snapshot_failure(refs.size(), 0);
  parallel_for(refs.size(), config.parallelism, [&](std::size_t i) {
    const auto& ref = refs[i];
    try {
      const auto page = fetch_snapshot(ref, transport, config.retry, &limiter, sleeper);
      links[i] = parse_category_page(page.body, config.venue, ref.source_url);
    } catch (const SnapshotUnavailable& e) {
      snapshot_failure[i] = 1;
      log::warn("snapshot_unavailable", {{"url", ref.archive_url}, {"status", e.status()}});
    } catch (const ParseFailure& e) {
      snapshot_failure[i] = 2;
      log::warn("snapshot_parse_failure", {{"url", ref.archive_url}, {"fingerprint", e.fingerprint()}});
    }
  });

  std::vector<Candidate> candidates;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (snapshot_failure[i] == 1) ++report.snapshots_unavailable;
    if (snapshot_failure[i] == 2) ++report.snapshot_parse_failures;
    if (!links[i]) continue;
    for (const auto& url : *links[i]) {
      ++report.links;
      const auto id = article_id_for(url);
      if (!seen.insert(id).second) {
        ++report.duplicates_dropped;
        continue;
      }
      candidates.push_back(Candidate{url, id, section_category.at(refs[i].section), refs[i].date});
    }
  }

  CorpusStore store(config.out);
  std::vector<FetchedArticle> fetched(candidates.size());
  parallel_for(candidates.size(), config.parallelism, [&](std::size_t i) {
    const auto& c = candidates[i];
    const auto page_url = archive_url_for(config.archive_host, c.seen_on, c.url);
    std::string html;
    try {
      html = fetch_url(transport, page_url, config.retry, &limiter, sleeper).body;
      fetched[i].parsed = parse_article(html, config.venue, c.url);
    } catch (const SnapshotUnavailable& e) {
      log::warn("article_unavailable", {{"url", c.url}, {"status", e.status()}});
      return;
    } catch (const ParseFailure& e) {
      log::warn("article_parse_failure", {{"url", c.url}, {"fingerprint", e.fingerprint()}});
      return;
    }
    for (auto& ref : extract_images(html, config.venue, denylist, c.url)) {
      FetchedImage img{ref, {}};
      if (config.fetch_images) {
        try {
          img.bytes = fetch_url(transport, archive_url_for(config.archive_host, c.seen_on, ref.source_url),
                                config.retry, &limiter, sleeper)
                          .body;
          img.ref.fetched = true;
        } catch (const SnapshotUnavailable& e) {
          log::warn("image_unavailable", {{"url", ref.source_url}, {"status", e.status()}});
        }
      }
      fetched[i].images.push_back(std::move(img));
    }
  });

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    auto& f = fetched[i];
    if (!f.parsed) {
      ++report.articles_failed;
      continue;
    }
    ArticleRecord rec;
    rec.article_id = c.article_id;
    rec.venue = config.venue;
    rec.category = c.category;
    rec.publish_date = f.parsed->publish_date.value_or(c.seen_on);
    rec.title = f.parsed->title;
    rec.body = f.parsed->body;
    rec.url = c.url;
    if (!config.range.contains(rec.publish_date)) {
      ++report.articles_out_of_range;
      log::debug("article_out_of_range", {{"url", c.url}, {"publish_date", rec.publish_date.iso()}});
      continue;
    }
    if (store.contains(rec)) {
      ++report.articles_already_stored;
      continue;
    }
    for (auto& img : f.images) {
      auto ref = img.ref;
      if (ref.fetched) {
        if (ref.width_px == 0 || ref.height_px == 0) {
          if (auto size = sniff_image_size(img.bytes)) {
            ref.width_px = size->first;
            ref.height_px = size->second;
          }
        }
        if (ref.width_px > 0 && ref.height_px > 0) {
          ref.image_id = short_hash(img.bytes);
          ref.bytes_path = store.put_image(ref.image_id, img.bytes);
        } else {
          ref.fetched = false;
          log::warn("image_undecodable", {{"url", ref.source_url}});
        }
      }
      if (!ref.fetched) ++report.images_unfetched;
      ++report.images;
      rec.image_refs.push_back(std::move(ref));
    }
    store.put_article(rec);
    ++report.articles_written;
  }
  store.write_manifest();
  log::info("ingest_done", {{"venue", venue_key(config.venue)},
                            {"snapshots", report.snapshots},
                            {"links", report.links},
                            {"articles_written", report.articles_written},
                            {"duplicates_dropped", report.duplicates_dropped}});
  return report;
}

}  // namespace biaskit::ingest
