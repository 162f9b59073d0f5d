#include "pnm/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pnm/error.hpp"

namespace pnm {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::InvalidInput, "not a number: '" + std::string(text) + "'");
  return v;
}

CsvWriter::CsvWriter(std::ostream& out, std::string_view kind, std::string_view echoed_config) : out_(out) {
  out_ << "# pnm-" << kind << " format " << kCsvFormatVersion << '\n';
  std::istringstream lines{std::string(echoed_config)};
  std::string line;
  while (std::getline(lines, line)) out_ << "# " << line << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (const auto& c : columns) *this << std::string_view(c);
  end_row();
}

void CsvWriter::sep() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::int64_t v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view v) {
  sep();
  if (v.find_first_of(",\"\n") == std::string_view::npos) {
    out_ << v;
    return *this;
  }
  out_ << '"';
  for (char c : v) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

}  // namespace pnm
