#pragma once

#include <json.hpp>
#include <string_view>

namespace biaskit::log {

enum class Level { Debug, Info, Warn, Error };

void set_level(Level level);

// One JSON object per line on stderr: {"level":..,"event":..,<fields>}.
void emit(Level level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

inline void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::Info, event, std::move(fields));
}
inline void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::Warn, event, std::move(fields));
}
inline void debug(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::Debug, event, std::move(fields));
}

}  // namespace biaskit::log
