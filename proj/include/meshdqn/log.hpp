#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace meshdqn {

enum class LogLevel : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

namespace detail {

inline LogLevel parse_log_level(const char* s) {
    if (!s) return LogLevel::Warn;
    if (!std::strcmp(s, "error")) return LogLevel::Error;
    if (!std::strcmp(s, "warn")) return LogLevel::Warn;
    if (!std::strcmp(s, "info")) return LogLevel::Info;
    if (!std::strcmp(s, "debug")) return LogLevel::Debug;
    return LogLevel::Warn;
}

}  // namespace detail

/// Process-wide level, initialized once from MESHDQN_LOG (error|warn|info|debug).
inline LogLevel& log_level() {
    static LogLevel level = detail::parse_log_level(std::getenv("MESHDQN_LOG"));
    return level;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void log_error(const std::string& m) { log_msg(LogLevel::Error, m); }
inline void log_warn(const std::string& m) { log_msg(LogLevel::Warn, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log_msg(LogLevel::Debug, m); }

}  // namespace meshdqn
