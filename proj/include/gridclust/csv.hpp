#pragma once

#include <charconv>
#include <ostream>
#include <string>

namespace gridclust {

/// Shortest decimal form that reads back to the same double. Negative zero
/// is printed as 0 so that outputs do not depend on the sign of rounding.
inline std::string fmt(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Writes comma-separated fields followed by a newline.
class CsvRow {
 public:
  explicit CsvRow(std::ostream& out) : out_(out) {}
  ~CsvRow() { out_ << '\n'; }
  CsvRow(const CsvRow&) = delete;
  CsvRow& operator=(const CsvRow&) = delete;

  CsvRow& operator<<(double v) { return put(fmt(v)); }
  CsvRow& operator<<(int v) { return put(std::to_string(v)); }
  CsvRow& operator<<(long long v) { return put(std::to_string(v)); }
  CsvRow& operator<<(const std::string& v) { return put(v); }
  CsvRow& operator<<(const char* v) { return put(v); }

 private:
  CsvRow& put(const std::string& field) {
    if (!first_) out_ << ',';
    first_ = false;
    out_ << field;
    return *this;
  }

  std::ostream& out_;
  bool first_ = true;
};

}  // namespace gridclust
