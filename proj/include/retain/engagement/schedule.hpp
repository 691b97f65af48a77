#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "retain/engagement/outbox.hpp"
#include "retain/engagement/templates.hpp"
#include "retain/hash.hpp"
#include "retain/json.hpp"
#include "retain/time.hpp"

namespace retain {

enum class Cadence { daily, weekly, monthly };

inline std::string_view to_string(Cadence c) {
  switch (c) {
    case Cadence::daily: return "daily";
    case Cadence::weekly: return "weekly";
    case Cadence::monthly: return "monthly";
  }
  return "";
}

inline std::optional<Cadence> parse_cadence(std::string_view text) {
  for (auto c : {Cadence::daily, Cadence::weekly, Cadence::monthly}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

struct Schedule {
  std::string schedule_id;
  std::string report_kind = "project_health";
  Cadence cadence = Cadence::weekly;
  std::string at_utc = "09:00";
  std::vector<std::string> recipients;
  bool enabled = true;
  std::optional<Timestamp> last_run;
};

// Minutes after midnight for a valid "HH:MM".
inline int parse_hhmm(const std::string& text) {
  int h = -1, m = -1;
  char tail = 0;
  if (text.size() != 5 || std::sscanf(text.c_str(), "%2d:%2d%c", &h, &m, &tail) != 2 || h < 0 || h > 23 || m < 0 ||
      m > 59) {
    fail(ErrorKind::validation, "invalid at_utc '" + text + "' (expected HH:MM)");
  }
  return h * 60 + m;
}

namespace detail {

inline Timestamp add_months(Timestamp boundary, int months) {
  using namespace std::chrono;
  const auto day_count = floor_days(boundary);
  const Timestamp time_of_day = boundary - day_count * kSecondsPerDay;
  year_month_day ymd{sys_days{std::chrono::days{day_count}}};
  ymd = ymd.year() / ymd.month() / 1d;
  ymd += std::chrono::months{months};
  return sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay + time_of_day;
}

// Latest firing boundary at or before t.
inline Timestamp boundary_at_or_before(Cadence cadence, int minute_of_day, Timestamp t) {
  const Timestamp offset = static_cast<Timestamp>(minute_of_day) * 60;
  switch (cadence) {
    case Cadence::daily: {
      Timestamp b = floor_days(t) * kSecondsPerDay + offset;
      return b > t ? b - kSecondsPerDay : b;
    }
    case Cadence::weekly: {
      const auto day = floor_days(t);
      const auto monday = day - ((day % 7 + 7 + 3) % 7);  // 1970-01-05 was a Monday
      Timestamp b = monday * kSecondsPerDay + offset;
      return b > t ? b - kSecondsPerWeek : b;
    }
    case Cadence::monthly: {
      using namespace std::chrono;
      const year_month_day ymd{sys_days{std::chrono::days{floor_days(t)}}};
      const Timestamp first = sys_days{ymd.year() / ymd.month() / 1d}.time_since_epoch().count() * kSecondsPerDay + offset;
      return first > t ? add_months(first, -1) : first;
    }
  }
  return t;
}

inline Timestamp next_boundary(Cadence cadence, Timestamp boundary) {
  switch (cadence) {
    case Cadence::daily: return boundary + kSecondsPerDay;
    case Cadence::weekly: return boundary + kSecondsPerWeek;
    case Cadence::monthly: return add_months(boundary, 1);
  }
  return boundary;
}

}  // namespace detail

// When the schedule should next fire. A schedule that never ran is due at
// the most recent boundary not after `now`; otherwise at the first boundary
// strictly after its last run.
inline Timestamp next_due(const Schedule& s, Timestamp now) {
  const int minute = parse_hhmm(s.at_utc);
  if (!s.last_run) return detail::boundary_at_or_before(s.cadence, minute, now);
  return detail::next_boundary(s.cadence, detail::boundary_at_or_before(s.cadence, minute, *s.last_run));
}

// Produces the report text for a firing schedule.
using ReportRenderer = std::function<RenderedMessage(const Schedule&, Timestamp now)>;

// Fires every enabled, due schedule once per recipient and stamps last_run.
// Message ids derive from (schedule, boundary, recipient), so replays at the
// same `now` emit nothing new.
inline std::vector<OutboxMessage> run_due_schedules(std::vector<Schedule>& schedules, Timestamp now,
                                                    const ReportRenderer& render, Outbox& outbox) {
  std::vector<OutboxMessage> emitted;
  for (auto& s : schedules) {
    if (!s.enabled) continue;
    const Timestamp due = next_due(s, now);
    if (now < due) continue;
    const auto rendered = render(s, now);
    for (const auto& recipient : s.recipients) {
      OutboxMessage m;
      m.message_id = stable_id("msg-", "schedule|" + s.schedule_id + "|" + std::to_string(due) + "|" + recipient);
      m.subject = rendered.subject;
      m.body = rendered.body;
      m.recipient = recipient;
      m.created_at = now;
      m.trigger = Trigger::schedule;
      if (outbox.append(m)) emitted.push_back(std::move(m));
    }
    s.last_run = now;
  }
  return emitted;
}

inline Json to_json(const Schedule& s) {
  Json j;
  j["schedule_id"] = s.schedule_id;
  j["report_kind"] = s.report_kind;
  j["cadence"] = to_string(s.cadence);
  j["at_utc"] = s.at_utc;
  j["recipients"] = s.recipients;
  j["enabled"] = s.enabled;
  j["last_run"] = s.last_run ? Json(*s.last_run) : Json(nullptr);
  return j;
}

inline Schedule schedule_from_json(const Json& j) {
  Schedule s;
  s.schedule_id = j.value("schedule_id", std::string());
  s.report_kind = j.value("report_kind", s.report_kind);
  const auto cadence = parse_cadence(j.value("cadence", std::string("weekly")));
  if (!cadence) fail(ErrorKind::validation, "cadence must be daily, weekly or monthly");
  s.cadence = *cadence;
  s.at_utc = j.value("at_utc", s.at_utc);
  parse_hhmm(s.at_utc);
  if (j.contains("recipients")) s.recipients = j["recipients"].get<std::vector<std::string>>();
  s.enabled = j.value("enabled", true);
  if (j.contains("last_run") && !j["last_run"].is_null()) s.last_run = j["last_run"].get<Timestamp>();
  return s;
}

}  // namespace retain
