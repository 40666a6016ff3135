#ifndef NEARMISS_LOG_HPP
#define NEARMISS_LOG_HPP

#include <cstdio>

namespace nearmiss {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from the NEARMISS_LOG environment variable
// (error|warn|info|debug); default warn.
LogLevel log_level();

void log_message(LogLevel level, const char* fmt, ...);

} // namespace nearmiss

#define NEARMISS_LOG_ERROR(...) ::nearmiss::log_message(::nearmiss::LogLevel::Error, __VA_ARGS__)
#define NEARMISS_LOG_WARN(...) ::nearmiss::log_message(::nearmiss::LogLevel::Warn, __VA_ARGS__)
#define NEARMISS_LOG_INFO(...) ::nearmiss::log_message(::nearmiss::LogLevel::Info, __VA_ARGS__)
#define NEARMISS_LOG_DEBUG(...) ::nearmiss::log_message(::nearmiss::LogLevel::Debug, __VA_ARGS__)

#endif
