#pragma once

namespace binls::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

// Level comes from BINLS_LOG={error,info,debug}; default error.
Level level();
void error(const char* fmt, ...);
void info(const char* fmt, ...);
void debug(const char* fmt, ...);

}  // namespace binls::log
