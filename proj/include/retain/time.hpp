#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "retain/error.hpp"

namespace retain {

// UTC seconds since the Unix epoch.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;
inline constexpr Timestamp kSecondsPerWeek = 7 * kSecondsPerDay;

// Whole days in a non-negative span, floored.
inline constexpr std::int64_t floor_days(Timestamp span) {
  return span >= 0 ? span / kSecondsPerDay : -((-span + kSecondsPerDay - 1) / kSecondsPerDay);
}

inline constexpr Timestamp days(std::int64_t n) { return n * kSecondsPerDay; }

// Parses "YYYY-MM-DDTHH:MM:SSZ" (fractional seconds and numeric offsets accepted).
inline Timestamp parse_iso8601(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  const std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &y, &mo, &d, &h, &mi, &s) != 6) {
    fail(ErrorKind::parse, "invalid ISO-8601 timestamp '" + buf + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    fail(ErrorKind::parse, "invalid ISO-8601 timestamp '" + buf + "'");
  }
  Timestamp t = sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay + h * 3600 + mi * 60 + s;
  // Offsets like +02:00 shift back to UTC.
  const auto tpos = buf.find('T');
  const auto off = buf.find_first_of("+-", tpos);
  if (off != std::string::npos) {
    int oh = 0, om = 0;
    if (std::sscanf(buf.c_str() + off + 1, "%2d:%2d", &oh, &om) >= 1) {
      const Timestamp shift = oh * 3600 + om * 60;
      t += buf[off] == '+' ? -shift : shift;
    }
  }
  return t;
}

inline std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto day_count = floor_days(t);
  const year_month_day ymd{sys_days{std::chrono::days{day_count}}};
  const Timestamp rem = t - day_count * kSecondsPerDay;
  char out[32];
  std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  return out;
}

}  // namespace retain
