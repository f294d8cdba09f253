#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "biaskit/core/files.hpp"
#include "biaskit/core/hash.hpp"
#include "biaskit/ingest/html.hpp"
#include "biaskit/ingest/ingest.hpp"
#include "biaskit/ingest/url.hpp"

using namespace biaskit;
using namespace biaskit::ingest;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(BIASKIT_FIXTURES) / "ingest";
const fs::path kConfig = fs::path(BIASKIT_SOURCE_DIR) / "config";

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("biaskit_ingest_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const Sleeper kNoSleep = [](std::chrono::milliseconds) {};

ArticleRecord article(const std::string& url, const std::string& title) {
  ArticleRecord r;
  r.url = canonical_url(url);
  r.article_id = article_id_for(r.url);
  r.title = title;
  r.body = "body";
  r.publish_date = Date(2015, 3, 1);
  return r;
}

}  // namespace

TEST_CASE("snapshot grid") {
  auto one = build_snapshot_urls(Venue::FOX, {Date(2015, 3, 1), Date(2015, 3, 1)}, {"travel"});
  REQUIRE(one.size() == 1);
  CHECK(one[0].archive_url.find("/web/20150301/") != std::string::npos);
  CHECK(one[0].archive_url == "https://web.archive.org/web/20150301/https://www.foxnews.com/travel");
  CHECK(one[0].date == Date(2015, 3, 1));

  auto three = build_snapshot_urls(Venue::NYT, {Date(2012, 1, 1), Date(2012, 1, 3)}, {"sports"});
  REQUIRE(three.size() == 3);
  CHECK(three[0].date == Date(2012, 1, 1));
  CHECK(three[1].date == Date(2012, 1, 2));
  CHECK(three[2].date == Date(2012, 1, 3));

  // day x section grid enumerated by hand
  auto four = build_snapshot_urls(Venue::NYT, {Date(2012, 1, 1), Date(2012, 1, 2)}, {"arts", "food"});
  const std::vector<std::string> expected{
      "https://web.archive.org/web/20120101/https://www.nytimes.com/section/arts",
      "https://web.archive.org/web/20120101/https://www.nytimes.com/section/food",
      "https://web.archive.org/web/20120102/https://www.nytimes.com/section/arts",
      "https://web.archive.org/web/20120102/https://www.nytimes.com/section/food"};
  REQUIRE(four.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(four[i].archive_url == expected[i]);

  CHECK(build_snapshot_urls(Venue::NYT, {Date(2015, 3, 2), Date(2015, 3, 1)}, {"arts"}).empty());
  CHECK_THROWS_AS(build_snapshot_urls(Venue::NYT, {Date(2015, 3, 1), Date(2015, 3, 1)}, {}), ConfigurationError);
  CHECK_THROWS_AS(build_snapshot_urls(Venue::NYT, {Date(2015, 3, 1), Date(2015, 3, 1)}, {"arts and crafts"}),
                  ConfigurationError);
  CHECK_THROWS_AS(build_snapshot_urls(Venue::NYT, {Date(2015, 3, 1), Date(2015, 3, 1)}, {"https:///nohost"}),
                  ConfigurationError);
  CHECK_THROWS_AS(build_snapshot_urls(Venue::NYT, {Date(2011, 12, 31), Date(2012, 1, 1)}, {"arts"}), InvalidInput);

  const auto custom = build_snapshot_urls(Venue::FOX, {Date(2020, 2, 28), Date(2020, 3, 1)},
                                          {"https://www.foxnews.com/entertainment"}, "http://archive.local/");
  REQUIRE(custom.size() == 3);
  CHECK(custom[2].archive_url == "http://archive.local/web/20200301/https://www.foxnews.com/entertainment");
}

TEST_CASE("snapshot grid size is days times sections") {
  const std::vector<std::string> sections{"arts", "sports", "food", "travel"};
  for (int days : {1, 2, 29, 366}) {
    for (std::size_t k = 1; k <= sections.size(); ++k) {
      const Date first(2016, 1, 1);
      const std::vector<std::string> s(sections.begin(), sections.begin() + static_cast<long>(k));
      CHECK(build_snapshot_urls(Venue::NYT, {first, first.plus_days(days - 1)}, s).size() ==
            static_cast<std::size_t>(days) * k);
    }
  }
}

TEST_CASE("canonical URLs") {
  CHECK(canonical_url("HTTP://WWW.NYTimes.com/2015/03/01/a.html/") == "https://www.nytimes.com/2015/03/01/a.html");
  CHECK(canonical_url("https://www.nytimes.com/a?utm_source=x&page=2&smid=tw") == "https://www.nytimes.com/a?page=2");
  CHECK(canonical_url("https://www.nytimes.com:443/a#frag") == "https://www.nytimes.com/a");
  CHECK(canonical_url("https://www.nytimes.com") == "https://www.nytimes.com/");
  CHECK(canonical_url("https://host:8080/x/") == "https://host:8080/x");
  CHECK_THROWS_AS(canonical_url("nytimes.com/a"), InvalidInput);
  CHECK(article_id_for(canonical_url("https://a.com/x?utm_medium=y")) == article_id_for("https://a.com/x"));
  CHECK(article_id_for("https://a.com/x") == article_id_for("https://a.com/x"));
  CHECK(article_id_for("https://a.com/x").size() == 16);

  CHECK(strip_archive_prefix("https://web.archive.org/web/20150301000512/https://www.nytimes.com/x") ==
        "https://www.nytimes.com/x");
  CHECK(strip_archive_prefix("/web/20150301000512im_/http://a.com/i.png") == "http://a.com/i.png");
  CHECK(strip_archive_prefix("https://www.nytimes.com/web/notanarchive") == "https://www.nytimes.com/web/notanarchive");
  CHECK(resolve_url("https://a.com/x/y.html", "z.html") == "https://a.com/x/z.html");
  CHECK(resolve_url("https://a.com/x/y.html", "/z") == "https://a.com/z");
  CHECK(resolve_url("https://a.com/x/y.html", "//b.com/z") == "https://b.com/z");
  CHECK_FALSE(resolve_url("https://a.com/", "mailto:x@a.com").has_value());
  CHECK_FALSE(resolve_url("https://a.com/", "#top").has_value());
}

TEST_CASE("html tree and entities") {
  const auto root = parse_html(
      "<div class='a b'><p>x &amp; y&#33; &#x41;</p><br><script>if (a<b) {}</script><P>second<span>!</span></p></div>");
  const auto ps = find_all(*root, "p");
  REQUIRE(ps.size() == 2);
  CHECK(ps[0]->text_content() == "x & y! A");
  CHECK(ps[1]->text_content() == "second!");
  const auto divs = find_all(*root, "div");
  REQUIRE(divs.size() == 1);
  CHECK(divs[0]->has_class("b"));
  CHECK_FALSE(divs[0]->has_class("ab"));
  CHECK(find_all(*root, "script").size() == 1);
  CHECK(find_all(*root, "script")[0]->children.empty());
  CHECK(decode_entities("&ldquo;hi&rdquo; &bogus; &") == "“hi” &bogus; &");
}

TEST_CASE("NYT sports fixture yields its 24 hand-counted links") {
  const auto html = read_file(kFixtures / "nyt_sports_20150301.html");
  const auto links = parse_category_page(html, Venue::NYT, "https://www.nytimes.com/section/sports");
  const auto expected = read_lines(kFixtures / "nyt_sports_20150301.expected.txt");
  CHECK(expected.size() == 24);
  CHECK(links.size() == 24);
  CHECK(links == expected);
}

TEST_CASE("Fox travel fixture yields its hand-counted links") {
  const auto html = read_file(kFixtures / "fox_travel_20150301.html");
  const auto links = parse_category_page(html, Venue::FOX, "https://www.foxnews.com/travel");
  const auto expected = read_lines(kFixtures / "fox_travel_20150301.expected.txt");
  CHECK(links.size() == 8);
  CHECK(links == expected);
}

TEST_CASE("category page edge cases") {
  const std::string twice =
      "<html><head><meta property='og:site_name' content='The New York Times'></head><body>"
      "<a href='https://www.nytimes.com/2016/05/05/arts/a-b.html'>1</a>"
      "<a href='https://www.nytimes.com/2016/05/05/arts/a-b.html'>2</a></body></html>";
  CHECK(parse_category_page(twice, Venue::NYT).size() == 1);
  CHECK(parse_category_page("", Venue::NYT).empty());
  CHECK(parse_category_page(read_file(kFixtures / "nyt_empty_section.html"), Venue::NYT).empty());
  try {
    parse_category_page(read_file(kFixtures / "unknown_layout.html"), Venue::NYT);
    FAIL("expected ParseFailure");
  } catch (const ParseFailure& e) {
    CHECK(e.fingerprint().size() == 16);
    CHECK(std::string(e.what()).find(e.fingerprint()) != std::string::npos);
  }
  CHECK_THROWS_AS(parse_category_page(read_file(kFixtures / "nyt_sports_20150301.html"), Venue::FOX), ParseFailure);
}

TEST_CASE("category normalization") {
  CHECK(normalize_category("entertainment", Venue::FOX) == Category::Art);
  CHECK(normalize_category("Lifestyle", Venue::FOX) == Category::Art);
  CHECK(normalize_category("lifestyle", Venue::NYT) == Category::Art);
  CHECK(normalize_category("arts", Venue::NYT) == Category::Art);
  CHECK(normalize_category("travel", Venue::FOX) == Category::Travel);
  CHECK(normalize_category("sports", Venue::NYT) == Category::Sport);
  CHECK(normalize_category("food", Venue::NYT) == Category::Food);
  CHECK(normalize_category("us", Venue::FOX) == Category::US);
  CHECK(normalize_category("https://www.foxnews.com/entertainment", Venue::FOX) == Category::Art);
  for (Category c : all_labels<Category>()) {
    CHECK(normalize_category(to_string(c), Venue::NYT) == c);
    CHECK(normalize_category(to_string(c), Venue::FOX) == c);
  }
  CHECK_THROWS_AS(normalize_category("entertainment", Venue::NYT), UnmappedCategory);
  CHECK_THROWS_AS(normalize_category("realestate", Venue::NYT), UnmappedCategory);
}

TEST_CASE("dedup keeps the first copy and is idempotent") {
  std::vector<ArticleRecord> recs{article("https://www.nytimes.com/2015/03/01/a.html", "A"),
                                  article("https://www.nytimes.com/2015/03/01/a.html", "A again"),
                                  article("https://www.nytimes.com/2015/03/01/b.html?utm_source=x", "B"),
                                  article("https://www.nytimes.com/2015/03/01/b.html", "B plain"),
                                  article("https://www.nytimes.com/2015/03/01/c.html", "A")};
  const auto once = dedup_articles(recs);
  REQUIRE(once.records.size() == 3);
  CHECK(once.dropped == 2);
  CHECK(once.records[0].title == "A");
  CHECK(once.records[1].title == "B");
  CHECK(once.records[2].title == "A");
  const auto twice = dedup_articles(once.records);
  CHECK(twice.records == once.records);
  CHECK(twice.dropped == 0);
}

TEST_CASE("article parsing and image extraction") {
  const auto nyt_html = read_file(kFixtures / "nyt_article_knicks.html");
  const auto nyt_deny = venue_denylist(kConfig, Venue::NYT);
  const auto parsed = parse_article(nyt_html, Venue::NYT);
  CHECK(parsed.title == "Knicks Fall to Cavaliers in a Long Night at the Garden");
  CHECK(parsed.publish_date == Date(2015, 3, 1));
  CHECK(parsed.body.rfind("CLEVELAND \u2014 The Knicks lost again", 0) == 0);
  CHECK(parsed.body.find("team’s 47th loss") != std::string::npos);
  CHECK(std::count(parsed.body.begin(), parsed.body.end(), '\n') == 6);

  // hand-labeled: three content photos, one masthead logo
  const auto imgs = extract_images(nyt_html, Venue::NYT, nyt_deny, "https://www.nytimes.com/2015/03/01/x.html");
  REQUIRE(imgs.size() == 3);
  CHECK(imgs[0].source_url == "https://static01.nyt.com/images/2015/03/01/sports/01knicks1/01knicks1-master675.jpg");
  CHECK(imgs[0].width_px == 640);
  CHECK(imgs[0].height_px == 480);
  CHECK(imgs[1].width_px == 0);
  CHECK(imgs[2].source_url.find("01knicks3-superJumbo.jpg") != std::string::npos);

  const auto fox_html = read_file(kFixtures / "fox_article_beaches.html");
  const auto fox_imgs = extract_images(fox_html, Venue::FOX, venue_denylist(kConfig, Venue::FOX));
  REQUIRE(fox_imgs.size() == 2);
  CHECK(fox_imgs[1].width_px == 300);
  CHECK(fox_imgs[1].height_px == 200);
  CHECK(parse_article(fox_html, Venue::FOX).body ==
        "Spring break is almost here, and these beaches are worth the trip.\n\n"
        "The first stop is a quiet stretch of sand on the Gulf coast.\n\n"
        "Book early, prices climb fast in March.");

  CHECK(extract_images("<html><body><article><p>text</p></article></body></html>", Venue::NYT, nyt_deny).empty());
  CHECK_THROWS_AS(parse_article("<html><body><div>nothing</div></body></html>", Venue::NYT), ParseFailure);
}

TEST_CASE("image header sniffing") {
  const std::vector<std::tuple<std::string, int, int>> cases{
      {"knicks1.jpg", 640, 480}, {"knicks2.png", 800, 533}, {"knicks3.jpg", 1024, 683},
      {"beach1.png", 600, 400},  {"beach2.gif", 300, 200},  {"nyt-logo.png", 184, 25}};
  for (const auto& [file, w, h] : cases) {
    CAPTURE(file);
    const auto size = sniff_image_size(read_file(kFixtures / "images" / file));
    REQUIRE(size.has_value());
    CHECK(size->first == w);
    CHECK(size->second == h);
  }
  CHECK_FALSE(sniff_image_size("not an image").has_value());
  CHECK_FALSE(sniff_image_size("").has_value());
}

TEST_CASE("fixture transport and retry contract") {
  FixtureTransport t(kFixtures);
  RetryPolicy policy;
  policy.max_attempts = 3;
  policy.base_delay = std::chrono::milliseconds(100);
  std::vector<std::chrono::milliseconds> sleeps;
  const Sleeper record = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };

  const auto page = fetch_url(t, "https://web.archive.org/web/20150301/https://www.nytimes.com/section/sports", policy,
                              nullptr, record);
  CHECK(page.body == read_file(kFixtures / "nyt_sports_20150301.html"));
  CHECK(page.attempts == 1);

  const auto flaky = fetch_url(t, "https://example.test/flaky", policy, nullptr, record);
  CHECK(flaky.attempts == 2);
  REQUIRE(sleeps.size() == 1);
  CHECK(sleeps[0] == std::chrono::milliseconds(100));

  sleeps.clear();
  const auto throttled = fetch_url(t, "https://example.test/throttled", policy, nullptr, record);
  CHECK(throttled.attempts == 2);
  REQUIRE(sleeps.size() == 1);
  CHECK(sleeps[0] == std::chrono::seconds(7));

  sleeps.clear();
  try {
    fetch_url(t, "https://example.test/gone", policy, nullptr, record);
    FAIL("expected SnapshotUnavailable");
  } catch (const SnapshotUnavailable& e) {
    CHECK(e.status() == 404);
  }
  CHECK(sleeps.size() == 2);
  CHECK(sleeps[1] == std::chrono::milliseconds(200));
  CHECK_THROWS_AS(fetch_url(t, "https://example.test/never-indexed", policy, nullptr, kNoSleep), SnapshotUnavailable);
}

TEST_CASE("rate limiter spaces requests per host") {
  std::vector<std::chrono::milliseconds> sleeps;
  RateLimiter limiter(2.0, [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  limiter.acquire("a.com");
  limiter.acquire("b.com");
  CHECK(sleeps.empty());
  limiter.acquire("a.com");
  REQUIRE(sleeps.size() == 1);
  CHECK(sleeps[0] > std::chrono::milliseconds(400));
  CHECK(sleeps[0] <= std::chrono::milliseconds(500));
  RateLimiter off(0, [&](std::chrono::milliseconds) { FAIL("limiter disabled"); });
  off.acquire("a.com");
  off.acquire("a.com");
}

TEST_CASE("ingest writes a deduplicated corpus store") {
  const auto out = temp_dir("run");
  FixtureTransport transport(kFixtures);
  IngestConfig cfg;
  cfg.venue = Venue::NYT;
  cfg.range = {Date(2015, 3, 1), Date(2015, 3, 2)};
  cfg.sections = {"sports"};
  cfg.out = out;
  cfg.config_dir = kConfig;
  cfg.rate_per_second = 0;
  cfg.retry.max_attempts = 2;
  const auto report = run_ingest(cfg, transport, kNoSleep);
  CHECK(report.snapshots == 2);
  CHECK(report.snapshots_unavailable == 0);
  CHECK(report.links == 48);
  CHECK(report.duplicates_dropped == 24);
  CHECK(report.articles_written == 1);
  CHECK(report.articles_failed == 23);
  CHECK(report.images == 3);
  CHECK(report.images_unfetched == 0);

  const auto corpus = load_corpus(out);
  REQUIRE(corpus.size() == 1);
  const auto& a = corpus[0];
  CHECK(a.url == "https://www.nytimes.com/2015/03/01/sports/basketball/knicks-fall-to-cavaliers.html");
  CHECK(a.article_id == article_id_for(a.url));
  CHECK(a.category == Category::Sport);
  CHECK(a.publish_date == Date(2015, 3, 1));
  CHECK(fs::exists(out / "corpus" / "nyt" / "2015" / (a.article_id + ".json")));
  REQUIRE(a.image_refs.size() == 3);
  CHECK(a.image_refs[1].width_px == 800);
  CHECK(a.image_refs[1].height_px == 533);
  for (const auto& img : a.image_refs) {
    CHECK(img.fetched);
    CHECK(fs::exists(out / img.bytes_path));
    CHECK(img.image_id == short_hash(read_file(out / img.bytes_path)));
  }
  const auto manifest = nlohmann::json::parse(read_file(out / "manifest.json"));
  CHECK(manifest["total"] == 1);
  CHECK(manifest["counts"]["NYT"]["Sport"]["2015"] == 1);

  const auto before = read_file(out / "manifest.json");
  FixtureTransport again(kFixtures);
  const auto second = run_ingest(cfg, again, kNoSleep);
  CHECK(second.articles_written == 0);
  CHECK(second.articles_already_stored == 1);
  CHECK(read_file(out / "manifest.json") == before);
}

TEST_CASE("ingest maps Fox lifestyle to Art and survives an unknown layout") {
  const auto out = temp_dir("fox");
  FixtureTransport transport(kFixtures);
  IngestConfig cfg;
  cfg.venue = Venue::FOX;
  cfg.range = {Date(2015, 3, 1), Date(2015, 3, 1)};
  cfg.sections = {"travel", "lifestyle"};
  cfg.out = out;
  cfg.config_dir = kConfig;
  cfg.rate_per_second = 0;
  cfg.retry.max_attempts = 1;
  const auto report = run_ingest(cfg, transport, kNoSleep);
  CHECK(report.snapshots == 2);
  CHECK(report.snapshot_parse_failures == 1);
  CHECK(report.links == 8);
  CHECK(report.articles_written == 1);
  const auto corpus = load_corpus(out);
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].category == Category::Travel);
  CHECK(corpus[0].image_refs.size() == 2);
  CHECK(corpus[0].image_refs[0].width_px == 600);

  cfg.sections = {"realestate"};
  CHECK_THROWS_AS(run_ingest(cfg, transport, kNoSleep), UnmappedCategory);
}
