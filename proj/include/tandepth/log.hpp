#pragma once

#include <string>

namespace tandepth {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Threshold comes from the TANDEPTH_LOG environment variable
// (debug|info|warn|error), default info.
LogLevel log_threshold();

void log(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& msg) { log(LogLevel::Debug, msg); }
inline void log_info(const std::string& msg) { log(LogLevel::Info, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::Warn, msg); }
inline void log_error(const std::string& msg) { log(LogLevel::Error, msg); }

}  // namespace tandepth
