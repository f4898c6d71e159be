#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace mcf::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Verbosity comes from MCF_LOG (error|warn|info|debug), default info.
inline Level level() {
    static Level lv = [] {
        const char* e = std::getenv("MCF_LOG");
        if (!e) return Level::info;
        if (std::strcmp(e, "error") == 0) return Level::error;
        if (std::strcmp(e, "warn") == 0) return Level::warn;
        if (std::strcmp(e, "debug") == 0) return Level::debug;
        return Level::info;
    }();
    return lv;
}

template <typename... Args>
void emit(Level lv, const char* tag, const char* fmt, Args... args) {
    if (lv > level()) return;
    std::fprintf(stderr, "[%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

template <typename... Args>
void error(const char* fmt, Args... args) { emit(Level::error, "error", fmt, args...); }
template <typename... Args>
void warn(const char* fmt, Args... args) { emit(Level::warn, "warn", fmt, args...); }
template <typename... Args>
void info(const char* fmt, Args... args) { emit(Level::info, "info", fmt, args...); }
template <typename... Args>
void debug(const char* fmt, Args... args) { emit(Level::debug, "debug", fmt, args...); }

}  // namespace mcf::log
