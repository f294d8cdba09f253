#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "biaskit/core/date.hpp"
#include "biaskit/core/labels.hpp"
#include "biaskit/core/retry.hpp"
#include "biaskit/ingest/corpus.hpp"
#include "biaskit/ingest/fetch.hpp"
#include "biaskit/ingest/parse.hpp"

namespace biaskit::ingest {

struct IngestConfig {
  Venue venue = Venue::NYT;
  DateRange range;
  std::vector<std::string> sections;
  std::filesystem::path out;
  std::filesystem::path config_dir = "config";
  std::string archive_host = std::string(kDefaultArchiveHost);
  double rate_per_second = 1.0;
  unsigned parallelism = 4;
  RetryPolicy retry;
  bool fetch_images = true;
};

struct IngestReport {
  std::size_t snapshots = 0;
  std::size_t snapshots_unavailable = 0;
  std::size_t snapshot_parse_failures = 0;
  std::size_t links = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t articles_written = 0;
  std::size_t articles_already_stored = 0;
  std::size_t articles_failed = 0;
  std::size_t articles_out_of_range = 0;
  std::size_t images = 0;
  std::size_t images_unfetched = 0;
};

// Fetches snapshots, parses their links, fetches each new article from the
// archive capture of the day it was first seen, extracts and downloads its
// images, and writes the corpus store. Output does not depend on fetch
// completion order.
IngestReport run_ingest(const IngestConfig& config, Transport& transport, const Sleeper& sleeper = real_sleeper());

}  // namespace biaskit::ingest
