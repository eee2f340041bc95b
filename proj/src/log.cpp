#include "binls/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace binls::log {

Level level() {
    static Level lv = [] {
        const char* env = std::getenv("BINLS_LOG");
        if (!env) return Level::Error;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        return Level::Error;
    }();
    return lv;
}

namespace {
void emit(const char* tag, const char* fmt, va_list args) {
    std::fprintf(stderr, "[%s] ", tag);
    std::vfprintf(stderr, fmt, args);
    std::fputc('\n', stderr);
}
}  // namespace

void error(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    emit("error", fmt, args);
    va_end(args);
}

void info(const char* fmt, ...) {
    if (level() < Level::Info) return;
    va_list args;
    va_start(args, fmt);
    emit("info", fmt, args);
    va_end(args);
}

void debug(const char* fmt, ...) {
    if (level() < Level::Debug) return;
    va_list args;
    va_start(args, fmt);
    emit("debug", fmt, args);
    va_end(args);
}

}  // namespace binls::log
