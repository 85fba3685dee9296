#ifndef SCENGEN_FORMAT_HPP
#define SCENGEN_FORMAT_HPP

#include <cstdio>
#include <cstdlib>
#include <string>

namespace scengen {

// Decimal form that parses back to exactly the same double, preferring the
// plain 15-digit form when it already round-trips. Keeps every emitted file
// byte-stable across runs and platforms.
inline std::string format_double(double v) {
  for (const int prec : {15, 16}) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  char best[40];
  std::snprintf(best, sizeof(best), "%.17g", v);
  return best;
}

}  // namespace scengen

#endif  // SCENGEN_FORMAT_HPP
