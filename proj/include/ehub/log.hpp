#pragma once

// Minimal stderr logging; the level comes from EHUB_LOG (0 quiet .. 3 debug, default 1).

#include <cstdarg>
#include <cstdio>
#include <cstdlib>

namespace ehub {

inline int log_level() {
  static const int level = [] {
    const char* v = std::getenv("EHUB_LOG");
    return v ? std::atoi(v) : 1;
  }();
  return level;
}

#if defined(__GNUC__)
__attribute__((format(printf, 2, 3)))
#endif
inline void log_msg(int level, const char* fmt, ...) {
  if (level > log_level()) return;
  std::va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

}  // namespace ehub
