#pragma once

#include <chrono>
#include <compare>
#include <string>

namespace epf {

// Calendar date in the market's local trading calendar. All arithmetic is
// plain day counting; no timezone handling happens downstream of ingestion.
using Date = std::chrono::sys_days;

Date make_date(int year, unsigned month, unsigned day);
Date parse_date(const std::string& text);   // "YYYY-MM-DD"
std::string to_string(Date d);

// ISO day of week, Monday = 1 .. Sunday = 7.
int weekday_iso(Date d);

struct Timestamp {
  Date day{};
  int hour = 0;  // 0..23
};

// "YYYY-MM-DD HH:MM[:SS]" or with 'T' as separator.
Timestamp parse_timestamp(const std::string& text);

struct YearMonth {
  int year = 0;
  unsigned month = 1;
  auto operator<=>(const YearMonth&) const = default;
};

YearMonth year_month(Date d);
std::string to_string(YearMonth ym);  // "YYYY-MM"

}  // namespace epf
