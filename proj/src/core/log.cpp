#include "biaskit/core/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace biaskit::log {

namespace {
std::atomic<Level> g_level{Level::Info};
std::mutex g_mutex;

const char* name(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "info";
}
}  // namespace

void set_level(Level level) { g_level = level; }

void emit(Level level, std::string_view event, nlohmann::json fields) {
  if (level < g_level.load()) return;
  nlohmann::json line = {{"level", name(level)}, {"event", event}};
  if (fields.is_object()) line.update(fields);
  std::lock_guard lock(g_mutex);
  std::cerr << line.dump() << '\n';
}

}  // namespace biaskit::log
