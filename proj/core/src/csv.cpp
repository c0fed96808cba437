#include "emos/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace emos::csv {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void Row::fail(std::size_t col, const std::string& what) const {
  throw SchemaError(source_, line_, col + 1, what);
}

const std::string& Row::text(std::size_t col) const {
  if (col >= fields_.size()) fail(col, "missing field");
  return fields_[col];
}

std::int64_t Row::integer(std::size_t col) const {
  const std::string& t = text(col);
  if (t.empty()) fail(col, "expected an integer, found an empty field");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (errno != 0 || end != t.c_str() + t.size()) fail(col, "expected an integer, found '" + t + "'");
  return v;
}

double Row::real(std::size_t col, bool allow_nan) const {
  const std::string& t = text(col);
  if (t.empty()) fail(col, "expected a number, found an empty field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) fail(col, "expected a number, found '" + t + "'");
  if (std::isnan(v) ? !allow_nan : !std::isfinite(v)) fail(col, "non-finite value '" + t + "'");
  return v;
}

double Row::real_or_missing(std::size_t col) const {
  const std::string& t = text(col);
  if (t.empty() || t == "nan" || t == "NA") return std::nan("");
  return real(col);
}

bool Row::flag(std::size_t col) const {
  const std::string& t = text(col);
  if (t == "1") return true;
  if (t == "0") return false;
  fail(col, "expected 0 or 1, found '" + t + "'");
}

void Row::require_empty(std::size_t col) const {
  if (!text(col).empty()) fail(col, "field must be empty");
}

namespace {

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

Reader::Reader(std::istream& in, std::string source, const std::string& expected_header)
    : in_(in), source_(std::move(source)) {
  std::string line;
  if (!read_line(in_, line)) throw SchemaError(source_, 1, 1, "missing header row");
  line_ = 1;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!expected_header.empty() && line != expected_header) {
    throw SchemaError(source_, 1, 1, "expected header '" + expected_header + "'");
  }
  header_ = split(line);
}

std::optional<Row> Reader::next() {
  std::string line;
  while (read_line(in_, line)) {
    ++line_;
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != header_.size()) {
      throw SchemaError(source_, line_, std::min(fields.size(), header_.size()) + 1,
                        "expected " + std::to_string(header_.size()) + " fields, found " +
                            std::to_string(fields.size()));
    }
    return Row(source_, line_, std::move(fields));
  }
  return std::nullopt;
}

}  // namespace emos::csv
