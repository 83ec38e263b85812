#pragma once

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

namespace scout {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from SCOUT_LOG_LEVEL (error|info|debug), default info.
inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* e = std::getenv("SCOUT_LOG_LEVEL");
        std::string s = e ? e : "info";
        if (s == "error") return LogLevel::Error;
        if (s == "debug") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return lvl;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
    if (lvl > log_level()) return;
    const char* tag = lvl == LogLevel::Error ? "error" : lvl == LogLevel::Info ? "info" : "debug";
    std::cerr << "[" << tag << "] " << msg << "\n";
}

inline void log_error(const std::string& m) { log_msg(LogLevel::Error, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log_msg(LogLevel::Debug, m); }

}  // namespace scout
