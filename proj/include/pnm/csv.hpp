#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pnm {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Parses a double written by format_double (or any strtod-compatible text).
double parse_double(std::string_view text);

inline constexpr int kCsvFormatVersion = 1;

/// Comma-separated writer. Every file opens with a comment header carrying the format
/// version and the echoed configuration.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::string_view kind, std::string_view echoed_config);

  void header(const std::vector<std::string>& columns);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(std::int64_t v);
  CsvWriter& operator<<(std::size_t v) { return *this << static_cast<std::int64_t>(v); }
  CsvWriter& operator<<(int v) { return *this << static_cast<std::int64_t>(v); }
  CsvWriter& operator<<(bool v) { return *this << static_cast<std::int64_t>(v ? 1 : 0); }
  CsvWriter& operator<<(std::string_view v);
  void end_row();

 private:
  void sep();

  std::ostream& out_;
  bool row_started_ = false;
};

}  // namespace pnm
