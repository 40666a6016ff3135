#include "nearmiss/log.hpp"

#include <cstdarg>
#include <cstdlib>
#include <cstring>

namespace nearmiss {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("NEARMISS_LOG");
        if (env == nullptr) {
            return LogLevel::Warn;
        }
        if (std::strcmp(env, "error") == 0) return LogLevel::Error;
        if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
        if (std::strcmp(env, "info") == 0) return LogLevel::Info;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return level;
}

void log_message(LogLevel level, const char* fmt, ...) {
    if (level > log_level()) {
        return;
    }
    const char* tag = "warn";
    switch (level) {
    case LogLevel::Error: tag = "error"; break;
    case LogLevel::Warn: tag = "warn"; break;
    case LogLevel::Info: tag = "info"; break;
    case LogLevel::Debug: tag = "debug"; break;
    }
    std::fprintf(stderr, "[nearmiss:%s] ", tag);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

} // namespace nearmiss
