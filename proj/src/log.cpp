#include "improvkit/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace improvkit {

namespace {

int level_from_env() {
  const char* v = std::getenv("IMPROVKIT_LOG");
  if (!v) return static_cast<int>(LogLevel::Error);
  const std::string s(v);
  if (s == "debug") return static_cast<int>(LogLevel::Debug);
  if (s == "info") return static_cast<int>(LogLevel::Info);
  return static_cast<int>(LogLevel::Error);
}

std::atomic<int>& level_ref() {
  static std::atomic<int> level{level_from_env()};
  return level;
}

void emit(LogLevel l, const char* tag, const std::string& msg) {
  if (static_cast<int>(l) > level_ref().load()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[improvkit " << tag << "] " << msg << '\n';
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_ref().load()); }
void set_log_level(LogLevel level) { level_ref() = static_cast<int>(level); }

void log_error(const std::string& msg) { emit(LogLevel::Error, "error", msg); }
void log_info(const std::string& msg) { emit(LogLevel::Info, "info", msg); }
void log_debug(const std::string& msg) { emit(LogLevel::Debug, "debug", msg); }

}  // namespace improvkit
