#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jsqstein::util {

/// Shortest text that carries 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), cols_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }

  CsvWriter& operator<<(double v) { return field(format_double(v)); }
  CsvWriter& operator<<(int v) { return field(std::to_string(v)); }
  CsvWriter& operator<<(long v) { return field(std::to_string(v)); }
  CsvWriter& operator<<(long long v) { return field(std::to_string(v)); }
  CsvWriter& operator<<(unsigned long v) { return field(std::to_string(v)); }
  CsvWriter& operator<<(unsigned long long v) { return field(std::to_string(v)); }
  CsvWriter& operator<<(std::string_view v) { return field(quote(v)); }
  CsvWriter& operator<<(const char* v) { return field(quote(v)); }

  void end_row() {
    if (col_ != cols_) throw std::logic_error("CSV row has the wrong number of fields");
    os_ << '\n';
    col_ = 0;
  }

 private:
  static std::string quote(std::string_view v) {
    if (v.find_first_of(",\"\n") == std::string_view::npos) return std::string(v);
    std::string q = "\"";
    for (char c : v) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  CsvWriter& field(const std::string& s) {
    if (col_ >= cols_) throw std::logic_error("CSV row has too many fields");
    os_ << (col_ ? "," : "") << s;
    ++col_;
    return *this;
  }

  std::ostream& os_;
  std::size_t cols_;
  std::size_t col_ = 0;
};

}  // namespace jsqstein::util
