#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace casimir::csv {

// Splits one CSV line on commas. No quoting support; the formats used here
// never contain embedded commas.
inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  // trim surrounding whitespace
  for (auto& f : out) {
    std::size_t b = f.find_first_not_of(" \t\r");
    std::size_t e = f.find_last_not_of(" \t\r");
    f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

// %.17g round-trips a double exactly; used for checksums and data dumps.
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// %.12g for human-facing output; enough digits for every documented value.
inline std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// FNV-1a 64-bit over a canonical string rendering. Used to verify that a
// user-supplied coefficient table matches the bundled one.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace casimir::csv
