#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "retain/core/identity.hpp"
#include "retain/core/lifecycle.hpp"
#include "retain/core/types.hpp"

namespace retain {

// Closed interval [start, end] of UTC seconds.
struct Window {
  Timestamp start = 0;
  Timestamp end = 0;
};

struct OverviewMetrics {
  Timestamp window_start = 0;
  Timestamp window_end = 0;
  int active_count = 0;
  int newcomer_count = 0;
  int departed_count = 0;
  int total_count = 0;
  double turnover_rate = 0.0;
  std::optional<double> avg_tenure_days;
};

// Project-level retention summary over `window`. Every contributor is judged
// only by their activity up to window.end, with status taken at window.end.
inline OverviewMetrics overview_metrics(const Community& community, std::span<const ContributionEvent> events,
                                        const LifecyclePolicy& policy, const Window& window) {
  validate(policy);
  if (!(window.start < window.end)) fail(ErrorKind::validation, "window start must precede end");
  if (policy.as_of && window.end > *policy.as_of) fail(ErrorKind::validation, "window end is after as_of");

  struct Span {
    Timestamp first, last;
    bool active = false;
  };
  std::map<std::string, Span> seen;
  for (const auto& e : events) {
    if (e.timestamp > window.end) continue;
    auto id = community.id_of_key.find(e.contributor_key);
    if (id == community.id_of_key.end()) continue;
    auto [it, fresh] = seen.try_emplace(id->second, Span{e.timestamp, e.timestamp});
    it->second.first = std::min(it->second.first, e.timestamp);
    it->second.last = std::max(it->second.last, e.timestamp);
    if (e.timestamp >= window.start) it->second.active = true;
  }

  OverviewMetrics m;
  m.window_start = window.start;
  m.window_end = window.end;
  LifecyclePolicy at_end = policy;
  at_end.as_of = window.end;
  double tenure_sum = 0.0;
  for (const auto& [id, span] : seen) {
    Contributor c;
    c.contributor_id = id;
    c.first_event = span.first;
    c.last_event = span.last;
    ++m.total_count;
    if (span.active) ++m.active_count;
    if (span.first >= window.start) ++m.newcomer_count;
    if (classify_status(c, at_end) == Status::departed) ++m.departed_count;
    tenure_sum += static_cast<double>(compute_tenure(c));
  }
  m.turnover_rate = static_cast<double>(m.departed_count) / std::max(1, m.total_count);
  if (m.total_count > 0) m.avg_tenure_days = tenure_sum / m.total_count;
  return m;
}

struct ActivityPoint {
  Timestamp bucket_start = 0;
  int events = 0;
  int active_contributors = 0;
};

struct ActivitySeries {
  int bucket_days = 1;
  std::vector<ActivityPoint> points;
};

// Contiguous buckets from window.start; the last one may be partial.
inline ActivitySeries activity_timeseries(std::span<const ContributionEvent> events, const Community& community,
                                          int bucket_days, const Window& window) {
  if (bucket_days < 1) fail(ErrorKind::validation, "bucket_days must be at least 1");
  if (window.end < window.start) fail(ErrorKind::validation, "window end precedes start");
  ActivitySeries series;
  series.bucket_days = bucket_days;
  const Timestamp width = days(bucket_days);
  const auto n_buckets = static_cast<std::size_t>((window.end - window.start) / width + 1);
  std::vector<std::set<std::string>> who(n_buckets);
  series.points.resize(n_buckets);
  for (std::size_t b = 0; b < n_buckets; ++b) series.points[b].bucket_start = window.start + static_cast<Timestamp>(b) * width;
  for (const auto& e : events) {
    if (e.timestamp < window.start || e.timestamp > window.end) continue;
    const auto b = static_cast<std::size_t>((e.timestamp - window.start) / width);
    ++series.points[b].events;
    auto id = community.id_of_key.find(e.contributor_key);
    who[b].insert(id != community.id_of_key.end() ? id->second : e.contributor_key);
  }
  for (std::size_t b = 0; b < n_buckets; ++b) series.points[b].active_contributors = static_cast<int>(who[b].size());
  return series;
}

enum class Lens { affiliation, gender, region, newcomer_status };

inline std::string_view to_string(Lens lens) {
  switch (lens) {
    case Lens::affiliation: return "affiliation";
    case Lens::gender: return "gender";
    case Lens::region: return "region";
    case Lens::newcomer_status: return "newcomer_status";
  }
  return "";
}

inline std::optional<Lens> parse_lens(std::string_view text) {
  for (Lens l : {Lens::affiliation, Lens::gender, Lens::region, Lens::newcomer_status}) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

// Group label of a contributor under a lens; missing attributes are "unknown".
inline std::string lens_group(const Contributor& c, Lens lens) {
  switch (lens) {
    case Lens::affiliation: return c.affiliation.empty() ? std::string(kUnknown) : c.affiliation;
    case Lens::gender:
      return c.demographics && c.demographics->gender ? *c.demographics->gender : std::string(kUnknown);
    case Lens::region:
      return c.demographics && c.demographics->region ? *c.demographics->region : std::string(kUnknown);
    case Lens::newcomer_status: return c.status == Status::newcomer ? "newcomer" : "established";
  }
  return std::string(kUnknown);
}

struct GroupShare {
  int count = 0;
  double share = 0.0;
};

inline std::map<std::string, GroupShare> demographic_distribution(std::span<const Contributor> contributors, Lens lens) {
  std::map<std::string, GroupShare> out;
  for (const auto& c : contributors) ++out[lens_group(c, lens)].count;
  for (auto& [group, gs] : out) gs.share = static_cast<double>(gs.count) / static_cast<double>(contributors.size());
  return out;
}

struct RosterEntry {
  std::string contributor_id;
  std::string display_name;
  Timestamp first_event = 0;
  Timestamp last_event = 0;
  std::int64_t gap_days = 0;
};

inline RosterEntry roster_entry(const Contributor& c, Timestamp as_of) {
  return {c.contributor_id, c.display_name, c.first_event, c.last_event, inactivity_gap_days(c, as_of)};
}

// Newcomers by first_event, latest first.
inline std::vector<RosterEntry> list_newcomers(std::span<const Contributor> contributors, const LifecyclePolicy& policy) {
  std::vector<RosterEntry> out;
  for (const auto& c : contributors) {
    if (classify_status(c, policy) == Status::newcomer) out.push_back(roster_entry(c, *policy.as_of));
  }
  std::sort(out.begin(), out.end(), [](const RosterEntry& a, const RosterEntry& b) {
    return a.first_event != b.first_event ? a.first_event > b.first_event : a.contributor_id < b.contributor_id;
  });
  return out;
}

// Inactive contributors, longest silence first.
inline std::vector<RosterEntry> list_inactive(std::span<const Contributor> contributors, const LifecyclePolicy& policy) {
  std::vector<RosterEntry> out;
  for (const auto& c : contributors) {
    if (classify_status(c, policy) == Status::inactive) out.push_back(roster_entry(c, *policy.as_of));
  }
  std::sort(out.begin(), out.end(), [](const RosterEntry& a, const RosterEntry& b) {
    return a.gap_days != b.gap_days ? a.gap_days > b.gap_days : a.contributor_id < b.contributor_id;
  });
  return out;
}

// ---- JSON ---------------------------------------------------------------

inline Json to_json(const OverviewMetrics& m) {
  Json j;
  j["window_start"] = m.window_start;
  j["window_end"] = m.window_end;
  j["active_count"] = m.active_count;
  j["newcomer_count"] = m.newcomer_count;
  j["departed_count"] = m.departed_count;
  j["total_count"] = m.total_count;
  j["turnover_rate"] = m.turnover_rate;
  j["avg_tenure_days"] = m.avg_tenure_days ? Json(*m.avg_tenure_days) : Json(nullptr);
  return j;
}

inline Json to_json(const ActivitySeries& s) {
  Json j;
  j["bucket_days"] = s.bucket_days;
  j["points"] = Json::array();
  for (const auto& p : s.points) {
    Json pj;
    pj["bucket_start"] = p.bucket_start;
    pj["events"] = p.events;
    pj["active_contributors"] = p.active_contributors;
    j["points"].push_back(std::move(pj));
  }
  return j;
}

inline Json to_json(const std::map<std::string, GroupShare>& dist) {
  Json j = Json::object();
  for (const auto& [group, gs] : dist) j[group] = Json{{"count", gs.count}, {"share", gs.share}};
  return j;
}

inline Json to_json(std::span<const RosterEntry> roster) {
  Json j = Json::array();
  for (const auto& r : roster) {
    Json rj;
    rj["contributor_id"] = r.contributor_id;
    rj["display_name"] = r.display_name;
    rj["first_event"] = r.first_event;
    rj["last_event"] = r.last_event;
    rj["gap_days"] = r.gap_days;
    j.push_back(std::move(rj));
  }
  return j;
}

}  // namespace retain
