// Minimal stderr logger. Level comes from the FORAMTRACE_LOG environment
// variable (error|warn|info|debug), default warn.
#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace foramtrace {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FORAMTRACE_LOG");
    if (env == nullptr) return LogLevel::Warn;
    const std::string_view v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "warn") return LogLevel::Warn;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

inline void log_at(LogLevel lvl, const char* tag, const std::string& msg) {
  if (lvl <= log_level()) std::cerr << "foramtrace " << tag << ": " << msg << "\n";
}

inline void log_error(const std::string& msg) { log_at(LogLevel::Error, "error", msg); }
inline void log_warn(const std::string& msg) { log_at(LogLevel::Warn, "warning", msg); }
inline void log_info(const std::string& msg) { log_at(LogLevel::Info, "info", msg); }
inline void log_debug(const std::string& msg) { log_at(LogLevel::Debug, "debug", msg); }

}  // namespace foramtrace
