#include "epf/dates.hpp"

#include <cstdio>
#include <cstdlib>

#include "epf/errors.hpp"

namespace epf {

namespace {

bool parse_int_field(const std::string& s, size_t pos, size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int value = 0;
  for (size_t i = pos; i < pos + len; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

}  // namespace

Date make_date(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                     std::chrono::day{day}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date: " + std::to_string(year) + "-" +
                     std::to_string(month) + "-" + std::to_string(day));
  }
  return sys_days{ymd};
}

Date parse_date(const std::string& text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !parse_int_field(text, 0, 4, y) || !parse_int_field(text, 5, 2, m) ||
      !parse_int_field(text, 8, 2, d)) {
    throw ParseError("malformed date: '" + text + "' (expected YYYY-MM-DD)");
  }
  return make_date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string to_string(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

int weekday_iso(Date d) {
  return static_cast<int>(std::chrono::weekday{d}.iso_encoding());
}

Timestamp parse_timestamp(const std::string& text) {
  // YYYY-MM-DD?HH:MM[:SS] with '?' in {' ', 'T'}
  if (text.size() < 16 || (text[10] != ' ' && text[10] != 'T')) {
    throw ParseError("malformed timestamp: '" + text + "'");
  }
  Date day = parse_date(text.substr(0, 10));
  int hh = 0, mm = 0;
  if (text[13] != ':' || !parse_int_field(text, 11, 2, hh) ||
      !parse_int_field(text, 14, 2, mm)) {
    throw ParseError("malformed timestamp: '" + text + "'");
  }
  if (text.size() > 16) {
    int ss = 0;
    if (text.size() != 19 || text[16] != ':' || !parse_int_field(text, 17, 2, ss)) {
      throw ParseError("malformed timestamp: '" + text + "'");
    }
    if (ss != 0) throw ParseError("sub-hour timestamp not supported: '" + text + "'");
  }
  if (hh < 0 || hh > 23 || mm != 0) {
    throw ParseError("timestamps must be on the hour: '" + text + "'");
  }
  return Timestamp{day, hh};
}

YearMonth year_month(Date d) {
  std::chrono::year_month_day ymd{d};
  return YearMonth{int(ymd.year()), unsigned(ymd.month())};
}

std::string to_string(YearMonth ym) {
  char buf[12];
  std::snprintf(buf, sizeof(buf), "%04d-%02u", ym.year, ym.month);
  return buf;
}

}  // namespace epf
