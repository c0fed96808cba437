#pragma once

// Minimal comma-separated table reader for the pipeline's fixed schemas.
// Fields never contain commas or quotes, so no quoting rules apply.

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "emos/error.hpp"

namespace emos::csv {

/// Nine significant digits; "nan" for NaN.
std::string format_real(double v);

std::vector<std::string> split(const std::string& line, char sep = ',');

class Row {
 public:
  Row(std::string source, std::size_t line, std::vector<std::string> fields)
      : source_(std::move(source)), line_(line), fields_(std::move(fields)) {}

  std::size_t size() const noexcept { return fields_.size(); }
  std::size_t line() const noexcept { return line_; }

  const std::string& text(std::size_t col) const;
  std::int64_t integer(std::size_t col) const;
  double real(std::size_t col, bool allow_nan = false) const;
  /// "", "nan" or "NA" read as NaN; anything else must be a finite number.
  double real_or_missing(std::size_t col) const;
  bool flag(std::size_t col) const;
  void require_empty(std::size_t col) const;

  template <class T>
  T parse(std::size_t col, const std::function<T(const std::string&)>& fn) const {
    try {
      return fn(text(col));
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception& e) {
      fail(col, e.what());
    }
  }

  [[noreturn]] void fail(std::size_t col, const std::string& what) const;

 private:
  std::string source_;
  std::size_t line_;
  std::vector<std::string> fields_;
};

class Reader {
 public:
  /// Reads and checks the header. `expected_header` may be empty to accept any.
  Reader(std::istream& in, std::string source, const std::string& expected_header);

  const std::vector<std::string>& header() const noexcept { return header_; }
  /// Next non-blank row, or nullopt at end of input.
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
  std::vector<std::string> header_;
};

}  // namespace emos::csv
