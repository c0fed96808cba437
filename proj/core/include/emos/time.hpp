#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace emos {

/// Whole-hour UTC timestamp.
using HourStamp = std::chrono::sys_time<std::chrono::hours>;
/// UTC calendar day.
using Date = std::chrono::sys_days;

inline Date date_of(HourStamp t) { return std::chrono::floor<std::chrono::days>(t); }
inline int hour_of_day(HourStamp t) {
  return static_cast<int>((t - date_of(t)).count());
}
inline unsigned month_of(HourStamp t) {
  return static_cast<unsigned>(std::chrono::year_month_day{date_of(t)}.month());
}

HourStamp make_hour(int year, unsigned month, unsigned day, int hour = 0);

/// "YYYY-MM-DDTHH:00:00Z"
std::string format_time(HourStamp t);
/// "YYYY-MM-DD"
std::string format_date(Date d);

/// Accepts "YYYY-MM-DDTHH:MM:SSZ" with zero minutes and seconds. Throws InvalidInput.
HourStamp parse_time(std::string_view text);
/// Accepts "YYYY-MM-DD". Throws InvalidInput.
Date parse_date(std::string_view text);

}  // namespace emos
