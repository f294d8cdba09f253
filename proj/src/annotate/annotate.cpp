#include "biaskit/annotate/annotate.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fmt/core.h>
#include <fstream>
#include <sstream>
#include <thread>

#include "biaskit/core/date.hpp"
#include "biaskit/core/files.hpp"
#include "biaskit/core/log.hpp"

namespace biaskit::annotate {

using nlohmann::json;

json to_json(const CacheEntry& e) {
  json j;
  j["article_id"] = e.article_id;
  j["task"] = std::string(to_string(e.task));
  j["provider_id"] = e.provider_id;
  j["model_version"] = e.model_version;
  j["label"] = e.label;
  j["confidence"] = e.confidence ? json(*e.confidence) : json(nullptr);
  j["raw"] = e.raw;
  j["timestamp"] = e.timestamp;
  return j;
}

CacheEntry cache_entry_from_json(const json& j) {
  CacheEntry e;
  e.article_id = j.at("article_id").get<std::string>();
  e.task = task_from_string(j.at("task").get<std::string>());
  e.provider_id = j.at("provider_id").get<std::string>();
  e.model_version = j.value("model_version", "");
  e.label = j.at("label").get<std::string>();
  if (j.contains("confidence") && !j["confidence"].is_null()) e.confidence = j["confidence"].get<double>();
  e.raw = j.value("raw", json(nullptr));
  e.timestamp = j.value("timestamp", "");
  return e;
}

AnnotationCache::AnnotationCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      auto e = cache_entry_from_json(json::parse(lines[i]));
      Key key{e.article_id, e.task, e.provider_id};
      entries_.insert_or_assign(std::move(key), std::move(e));
    } catch (const std::exception& ex) {
      if (i + 1 == lines.size()) {
        log::warn("annotation_cache_torn_line", {{"path", path_.string()}});
        break;
      }
      throw FormatError(fmt::format("{}:{}: bad cache entry: {}", path_.string(), i + 1, ex.what()));
    }
  }
}

std::optional<CacheEntry> AnnotationCache::find(std::string_view article_id, Task task,
                                                std::string_view provider_id) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(Key{std::string(article_id), task, std::string(provider_id)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void AnnotationCache::append(const CacheEntry& entry) {
  std::lock_guard lock(mu_);
  if (!path_.empty()) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << to_json(entry).dump() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to annotation cache " + path_.string());
  }
  entries_.insert_or_assign(Key{entry.article_id, entry.task, entry.provider_id}, entry);
}

std::size_t AnnotationCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

namespace {

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

bool blank(std::string_view line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

std::vector<std::string> paragraphs_of(std::string_view body) {
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    const auto line = body.substr(pos, nl - pos);
    if (blank(line)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
    pos = nl + 1;
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string join_words(const std::vector<std::string>& words, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (i > first) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string validated_label(Task task, const std::string& label, const std::string& raw) {
  std::optional<std::string_view> name;
  switch (task) {
    case Task::Emotion:
      if (auto v = parse_label<Emotion>(label)) name = to_string(*v);
      break;
    case Task::Sentiment:
      if (auto v = parse_label<Sentiment>(label)) name = to_string(*v);
      break;
    case Task::Topic:
      if (auto v = parse_label<Topic>(label)) name = to_string(*v);
      break;
    case Task::Race:
      if (fold_label(label) == "none") name = "None";
      else if (auto v = parse_label<Race6>(label)) name = to_string(*v);
      break;
    case Task::VictimPerp: return format_vp_response(parse_vp_response(label));
  }
  if (!name) throw MalformedAnnotation(fmt::format("{} label '{}' is not in the label set", to_string(task), label), raw);
  return std::string(*name);
}

ProviderResponse call_provider(Provider& provider, const ProviderRequest& request) {
  try {
    return provider.call(request);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw AnnotationUnavailable(fmt::format("provider {}: {}", provider.id(), e.what()));
  }
}

void apply(const CacheEntry& e, AnnotationRecord& r) {
  switch (e.task) {
    case Task::Emotion: r.emotion = label_from_string<Emotion>(e.label); break;
    case Task::Sentiment: r.sentiment = label_from_string<Sentiment>(e.label); break;
    case Task::Topic: r.topic = label_from_string<Topic>(e.label); break;
    case Task::Race:
      if (e.label == "None") {
        r.race.reset();
        r.race_confidence.reset();
      } else {
        r.race = label_from_string<Race6>(e.label);
        r.race_confidence = e.confidence;
      }
      break;
    case Task::VictimPerp: r.vp = parse_vp_response(e.label); break;
  }
}

}  // namespace

std::vector<std::string> text_chunk(std::string_view body, std::size_t limit) {
  if (limit == 0) throw InvalidInput("text_chunk: limit must be positive");
  std::vector<std::string> chunks;
  std::string current;
  std::size_t current_len = 0;
  auto flush = [&] {
    if (!current.empty()) chunks.push_back(std::move(current));
    current.clear();
    current_len = 0;
  };
  for (auto& para : paragraphs_of(body)) {
    const auto words = words_of(para);
    if (words.empty()) continue;
    if (words.size() > limit) {
      flush();
      for (std::size_t i = 0; i < words.size(); i += limit)
        chunks.push_back(join_words(words, i, std::min(words.size(), i + limit)));
      continue;
    }
    if (current_len + words.size() > limit) flush();
    if (!current.empty()) current += "\n\n";
    current += para;
    current_len += words.size();
  }
  flush();
  return chunks;
}

std::string majority_label(const std::vector<std::string>& labels) {
  if (labels.empty()) throw InvalidInput("majority_label: no labels");
  std::vector<std::pair<std::string, std::size_t>> counts;
  for (const auto& l : labels) {
    auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == l; });
    if (it == counts.end()) counts.emplace_back(l, 1);
    else ++it->second;
  }
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

CacheEntry annotate_task(std::string_view article_id, std::string_view body, Task task, Provider& provider,
                         AnnotationCache& cache, const AnnotateOptions& options) {
  const std::string provider_id = provider.id();
  if (auto hit = cache.find(article_id, task, provider_id)) return *hit;

  CacheEntry entry;
  entry.article_id = std::string(article_id);
  entry.task = task;
  entry.provider_id = provider_id;
  entry.model_version = provider.model_version();
  entry.timestamp = options.timestamp.empty() ? utc_timestamp_now() : options.timestamp;

  if (task == Task::VictimPerp) {
    const auto resp = call_provider(provider, ProviderRequest{task, build_vp_prompt(body), {}});
    entry.raw = resp.raw;
    entry.label = validated_label(task, resp.label, resp.raw);
  } else {
    std::vector<std::string> chunks;
    if (options.chunk_limit > 0) chunks = text_chunk(body, options.chunk_limit);
    if (chunks.empty()) chunks.emplace_back(body);
    const auto labels_allowed = label_set(task);
    std::vector<std::string> labels;
    std::vector<std::optional<double>> confidences;
    json raws = json::array();
    for (const auto& chunk : chunks) {
      const auto resp = call_provider(provider, ProviderRequest{task, chunk, labels_allowed});
      labels.push_back(validated_label(task, resp.label, resp.raw));
      confidences.push_back(resp.confidence);
      raws.push_back(resp.raw);
    }
    entry.label = majority_label(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == entry.label) {
        entry.confidence = confidences[i];
        break;
      }
    }
    entry.raw = chunks.size() == 1 ? raws[0] : raws;
  }
  cache.append(entry);
  return entry;
}

AnnotationRecord annotate(std::string_view article_id, std::string_view body, const std::vector<Task>& tasks,
                          Provider& provider, AnnotationCache& cache, const AnnotateOptions& options) {
  AnnotationRecord r;
  r.article_id = std::string(article_id);
  r.provider_meta = {provider.id(), provider.model_version(),
                     options.timestamp.empty() ? utc_timestamp_now() : options.timestamp};
  for (Task task : tasks) {
    const std::string name(to_string(task));
    try {
      apply(annotate_task(article_id, body, task, provider, cache, options), r);
    } catch (const MalformedAnnotation& e) {
      r.errors[name] = std::string("MalformedAnnotation: ") + e.what();
      log::warn("annotation_malformed", {{"article_id", r.article_id}, {"task", name}, {"raw", e.raw()}});
    } catch (const AnnotationUnavailable& e) {
      r.errors[name] = std::string("AnnotationUnavailable: ") + e.what();
      log::warn("annotation_unavailable", {{"article_id", r.article_id}, {"task", name}, {"reason", e.what()}});
    }
  }
  return r;
}

std::vector<AnnotationRecord> annotate_all(const std::vector<ArticleText>& articles, const std::vector<Task>& tasks,
                                           Provider& provider, AnnotationCache& cache, const AnnotateOptions& options,
                                           unsigned parallelism) {
  std::vector<AnnotationRecord> out(articles.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < articles.size();) {
      try {
        out[i] = annotate(articles[i].article_id, articles[i].body, tasks, provider, cache, options);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = articles.size();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(articles.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<AnnotationRecord> filter_non_neutral(const std::vector<AnnotationRecord>& records) {
  std::vector<AnnotationRecord> out;
  for (const auto& r : records)
    if (r.emotion && *r.emotion != Emotion::Neutral) out.push_back(r);
  return out;
}

void apply_min_race_confidence(std::vector<AnnotationRecord>& records, double threshold) {
  for (auto& r : records) {
    if (r.race && !(r.race_confidence && *r.race_confidence >= threshold)) {
      r.race.reset();
      r.race_confidence.reset();
    }
  }
}

std::vector<Task> parse_tasks(std::string_view csv) {
  std::vector<Task> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto comma = csv.find(',', pos);
    if (comma == std::string_view::npos) comma = csv.size();
    const auto item = csv.substr(pos, comma - pos);
    if (!fold_label(item).empty()) {
      const Task t = task_from_string(item);
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigurationError("no annotation tasks given");
  return out;
}

void write_annotations(const std::filesystem::path& path, const std::vector<AnnotationRecord>& records) {
  std::string text;
  for (const auto& r : records) text += to_json(r).dump() + "\n";
  write_file_atomic(path, text);
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open annotation file " + path.string());
  std::vector<AnnotationRecord> out;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(annotation_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

}  // namespace biaskit::annotate
