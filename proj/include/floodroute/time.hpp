#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "floodroute/error.hpp"

namespace floodroute {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

namespace detail {

inline bool read_digits(std::string_view s, std::size_t pos, std::size_t n,
                        int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

// Parses an RFC 3339 date-time ("2017-08-30T14:05:00Z", "...05.25-05:00").
// Fractional seconds are kept to millisecond resolution.
inline Timestamp parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  auto fail = [&]() -> Error {
    return Error(Errc::parse_error,
                 "invalid RFC 3339 timestamp '" + std::string(s) + "'");
  };
  int y, mo, d, h, mi, sec;
  if (!detail::read_digits(s, 0, 4, y) || s.size() < 20 || s[4] != '-' ||
      !detail::read_digits(s, 5, 2, mo) || s[7] != '-' ||
      !detail::read_digits(s, 8, 2, d) ||
      (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      !detail::read_digits(s, 11, 2, h) || s[13] != ':' ||
      !detail::read_digits(s, 14, 2, mi) || s[16] != ':' ||
      !detail::read_digits(s, 17, 2, sec)) {
    throw fail();
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw fail();

  std::size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int scale = 100;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      millis += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) throw fail();
  }
  if (pos >= s.size()) throw fail();

  minutes offset{0};
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh, om;
    if (!detail::read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() ||
        s[pos + 3] != ':' || !detail::read_digits(s, pos + 4, 2, om) ||
        oh > 23 || om > 59) {
      throw fail();
    }
    offset = minutes{oh * 60 + om};
    if (s[pos] == '-') offset = -offset;
    pos += 6;
  } else {
    throw fail();
  }
  if (pos != s.size()) throw fail();

  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} +
         milliseconds{millis} - offset;
}

// UTC, second resolution unless the instant carries milliseconds.
inline std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  hh_mm_ss tod{t - day_point};
  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d",
                        static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()),
                        static_cast<int>(tod.hours().count()),
                        static_cast<int>(tod.minutes().count()),
                        static_cast<int>(tod.seconds().count()));
  std::string out(buf, static_cast<std::size_t>(n));
  if (auto ms = tod.subseconds().count(); ms != 0) {
    std::snprintf(buf, sizeof buf, ".%03d", static_cast<int>(ms));
    out += buf;
  }
  out += 'Z';
  return out;
}

}  // namespace floodroute
