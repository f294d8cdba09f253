#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "biaskit/annotate/prompt.hpp"
#include "biaskit/annotate/provider.hpp"
#include "biaskit/annotate/types.hpp"

namespace biaskit::annotate {

struct CacheEntry {
  std::string article_id;
  Task task = Task::Emotion;
  std::string provider_id;
  std::string model_version;
  std::string label;  // validated label, or the canonical reply for the victim/perpetrator task
  std::optional<double> confidence;
  nlohmann::json raw;  // raw response string, or one string per chunk
  std::string timestamp;
};

nlohmann::json to_json(const CacheEntry& e);
CacheEntry cache_entry_from_json(const nlohmann::json& j);

// Append-only JSONL log keyed by (article_id, task, provider_id). A torn
// last line left by a crash is ignored on load. With an empty path the
// cache lives in memory only.
class AnnotationCache {
 public:
  AnnotationCache() = default;
  explicit AnnotationCache(std::filesystem::path path);

  std::optional<CacheEntry> find(std::string_view article_id, Task task, std::string_view provider_id) const;
  void append(const CacheEntry& entry);
  std::size_t size() const;

 private:
  using Key = std::tuple<std::string, Task, std::string>;

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<Key, CacheEntry> entries_;
};

// Paragraphs are separated by blank lines; length is counted in
// whitespace-separated words. Paragraphs are packed greedily; a paragraph
// longer than the limit is split between words.
std::vector<std::string> text_chunk(std::string_view body, std::size_t limit);

// Most frequent label; on a tie, the tied label seen first.
std::string majority_label(const std::vector<std::string>& labels);

struct AnnotateOptions {
  std::size_t chunk_limit = 0;  // 0: never chunk
  std::string timestamp;        // empty: wall clock
};

// One task for one article. Throws MalformedAnnotation for out-of-set
// answers and AnnotationUnavailable when the provider fails; failures are
// not cached.
CacheEntry annotate_task(std::string_view article_id, std::string_view body, Task task, Provider& provider,
                         AnnotationCache& cache, const AnnotateOptions& options = {});

// All tasks for one article. A failing task is recorded in errors and
// leaves its field empty; the other tasks are unaffected.
AnnotationRecord annotate(std::string_view article_id, std::string_view body, const std::vector<Task>& tasks,
                          Provider& provider, AnnotationCache& cache, const AnnotateOptions& options = {});

struct ArticleText {
  std::string article_id;
  std::string body;
};

// annotate over many articles with up to `parallelism` concurrent provider
// calls. Output order follows the input.
std::vector<AnnotationRecord> annotate_all(const std::vector<ArticleText>& articles, const std::vector<Task>& tasks,
                                           Provider& provider, AnnotationCache& cache,
                                           const AnnotateOptions& options = {}, unsigned parallelism = 1);

std::vector<AnnotationRecord> filter_non_neutral(const std::vector<AnnotationRecord>& records);

// Drops race mentions whose confidence is below the threshold (or missing).
void apply_min_race_confidence(std::vector<AnnotationRecord>& records, double threshold);

std::vector<Task> parse_tasks(std::string_view csv);

void write_annotations(const std::filesystem::path& path, const std::vector<AnnotationRecord>& records);
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);

}  // namespace biaskit::annotate
