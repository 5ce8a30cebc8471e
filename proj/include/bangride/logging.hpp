#pragma once

#include <iostream>
#include <sstream>
#include <string_view>

namespace bangride::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Current verbosity, read once from BANGRIDE_LOG (error|warn|info|debug; default warn).
Level threshold();
void set_threshold(Level level);
Level parse_level(std::string_view text, Level fallback);

void emit(Level level, const std::string& message);

template <typename... Args>
void write(Level level, const Args&... args) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::ostringstream os;
  (os << ... << args);
  emit(level, os.str());
}

template <typename... Args>
void error(const Args&... args) { write(Level::error, args...); }
template <typename... Args>
void warn(const Args&... args) { write(Level::warn, args...); }
template <typename... Args>
void info(const Args&... args) { write(Level::info, args...); }
template <typename... Args>
void debug(const Args&... args) { write(Level::debug, args...); }

}  // namespace bangride::log
