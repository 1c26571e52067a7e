#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringdrive {

// Round-trip-precision text for a double; integers print without a point so
// the files stay easy on the eye.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_number(long long v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld", v);
  return buf;
}

inline std::string format_number(int v) { return format_number(static_cast<long long>(v)); }

// Minimal line-oriented CSV writer with deterministic formatting.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : os_(path, std::ios::trunc) {
    if (!os_) throw std::runtime_error("cannot open " + path + " for writing");
  }

  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) os_ << ',';
      os_ << c;
      first = false;
    }
    os_ << '\n';
  }

  void flush() { os_.flush(); }

 private:
  std::ofstream os_;
};

}  // namespace ringdrive
