#include "bangride/logging.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>

namespace bangride::log {
namespace {

std::atomic<int>& level_storage() {
  static std::atomic<int> level = [] {
    const char* env = std::getenv("BANGRIDE_LOG");
    return static_cast<int>(env ? parse_level(env, Level::warn) : Level::warn);
  }();
  return level;
}

constexpr const char* kNames[] = {"error", "warn", "info", "debug"};

}  // namespace

Level parse_level(std::string_view text, Level fallback) {
  for (int i = 0; i < 4; ++i) {
    if (text == kNames[i]) return static_cast<Level>(i);
  }
  return fallback;
}

Level threshold() { return static_cast<Level>(level_storage().load()); }

void set_threshold(Level level) { level_storage().store(static_cast<int>(level)); }

void emit(Level level, const std::string& message) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[bangride:" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace bangride::log
