#include "emos/time.hpp"

#include <cstdio>

#include "emos/error.hpp"

namespace emos {

using namespace std::chrono;

HourStamp make_hour(int year, unsigned month, unsigned day, int hour) {
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  if (!ymd.ok()) throw InvalidInput("invalid calendar date");
  return sys_days{ymd} + hours{hour};
}

std::string format_date(Date d) {
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_time(HourStamp t) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "T%02d", hour_of_day(t));
  return format_date(date_of(t)) + buf + ":00:00Z";
}

namespace {

bool read_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

Date parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !read_digits(text, 0, 4, y) ||
      !read_digits(text, 5, 2, m) || !read_digits(text, 8, 2, d)) {
    throw InvalidInput("malformed date '" + std::string(text) + "'");
  }
  const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                           std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw InvalidInput("invalid date '" + std::string(text) + "'");
  return sys_days{ymd};
}

HourStamp parse_time(std::string_view text) {
  int h = 0, mi = 0, s = 0;
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z' || !read_digits(text, 11, 2, h) || !read_digits(text, 14, 2, mi) ||
      !read_digits(text, 17, 2, s) || h > 23) {
    throw InvalidInput("malformed timestamp '" + std::string(text) + "'");
  }
  if (mi != 0 || s != 0) {
    throw InvalidInput("timestamp '" + std::string(text) + "' is not on a whole hour");
  }
  return parse_date(text.substr(0, 10)) + hours{h};
}

}  // namespace emos
