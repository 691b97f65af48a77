#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "retain/error.hpp"
#include "retain/json.hpp"
#include "retain/time.hpp"

namespace retain {

enum class EventKind { commit, pr_opened, pr_review, issue_opened, issue_comment };

inline constexpr std::array<EventKind, 5> kAllEventKinds = {
    EventKind::commit, EventKind::pr_opened, EventKind::pr_review, EventKind::issue_opened,
    EventKind::issue_comment};

inline std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::commit: return "commit";
    case EventKind::pr_opened: return "pr_opened";
    case EventKind::pr_review: return "pr_review";
    case EventKind::issue_opened: return "issue_opened";
    case EventKind::issue_comment: return "issue_comment";
  }
  return "";
}

inline std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (EventKind k : kAllEventKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

inline std::size_t index_of(EventKind kind) { return static_cast<std::size_t>(kind); }

struct ContributionEvent {
  std::string event_id;
  std::string contributor_key;
  std::optional<std::string> email;
  std::optional<std::string> display_name;
  Timestamp timestamp = 0;
  EventKind kind = EventKind::commit;
  std::string repo;
  std::vector<std::string> tags;
};

// Throws validation errors for the per-event invariants.
inline void validate(const ContributionEvent& e) {
  if (e.event_id.empty()) fail(ErrorKind::validation, "event_id must be non-empty");
  if (e.contributor_key.empty()) {
    fail(ErrorKind::validation, "event " + e.event_id + ": contributor_key must be non-empty");
  }
  if (e.timestamp <= 0) {
    fail(ErrorKind::validation, "event " + e.event_id + ": timestamp must be positive");
  }
  std::vector<std::string> sorted = e.tags;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail(ErrorKind::validation, "event " + e.event_id + ": duplicate tag");
  }
}

enum class Status { newcomer, active, inactive, departed };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::newcomer: return "newcomer";
    case Status::active: return "active";
    case Status::inactive: return "inactive";
    case Status::departed: return "departed";
  }
  return "";
}

enum class DemographicSource { inferred, self_reported, corrected };

inline std::string_view to_string(DemographicSource s) {
  switch (s) {
    case DemographicSource::inferred: return "inferred";
    case DemographicSource::self_reported: return "self_reported";
    case DemographicSource::corrected: return "corrected";
  }
  return "";
}

inline std::optional<DemographicSource> parse_demographic_source(std::string_view text) {
  if (text == "inferred") return DemographicSource::inferred;
  if (text == "self_reported") return DemographicSource::self_reported;
  if (text == "corrected") return DemographicSource::corrected;
  return std::nullopt;
}

struct Demographics {
  std::optional<std::string> gender;
  std::optional<std::string> region;
  double confidence = 0.0;
  DemographicSource source = DemographicSource::inferred;
};

inline constexpr std::string_view kUnknown = "unknown";

struct Contributor {
  std::string contributor_id;
  std::string display_name;
  std::set<std::string> aliases;
  std::set<std::string> emails;
  Timestamp first_event = 0;
  Timestamp last_event = 0;
  Status status = Status::active;
  std::string affiliation{kUnknown};
  std::optional<Demographics> demographics;
};

struct LifecyclePolicy {
  int inactive_after_days = 180;
  int departed_after_days = 365;
  int newcomer_within_days = 90;
  // Unset means "latest event timestamp in the project".
  std::optional<Timestamp> as_of;
};

inline void validate(const LifecyclePolicy& p) {
  if (p.newcomer_within_days <= 0) {
    fail(ErrorKind::validation, "newcomer_within_days must be positive");
  }
  if (p.inactive_after_days <= 0 || p.inactive_after_days >= p.departed_after_days) {
    fail(ErrorKind::validation, "require 0 < inactive_after_days < departed_after_days");
  }
}

// ---- JSON ---------------------------------------------------------------

inline Json to_json(const ContributionEvent& e) {
  Json j;
  j["event_id"] = e.event_id;
  j["contributor_key"] = e.contributor_key;
  j["email"] = e.email ? Json(*e.email) : Json(nullptr);
  j["display_name"] = e.display_name ? Json(*e.display_name) : Json(nullptr);
  j["timestamp"] = e.timestamp;
  j["kind"] = to_string(e.kind);
  j["repo"] = e.repo;
  j["tags"] = e.tags;
  return j;
}

inline Json to_json(const Demographics& d) {
  Json j = Json::object();
  if (d.gender) j["gender"] = *d.gender;
  if (d.region) j["region"] = *d.region;
  j["confidence"] = d.confidence;
  j["source"] = to_string(d.source);
  return j;
}

inline Demographics demographics_from_json(const Json& j) {
  Demographics d;
  if (j.contains("gender") && !j["gender"].is_null()) d.gender = j["gender"].get<std::string>();
  if (j.contains("region") && !j["region"].is_null()) d.region = j["region"].get<std::string>();
  d.confidence = j.value("confidence", 0.0);
  const auto src = parse_demographic_source(j.value("source", std::string("inferred")));
  if (!src) fail(ErrorKind::validation, "unknown demographic source");
  d.source = *src;
  return d;
}

// Contributor JSON; demographic attributes (and email-shaped aliases, which
// reveal affiliation) are emitted only when requested.
inline Json to_json(const Contributor& c, bool include_demographics) {
  Json j;
  j["contributor_id"] = c.contributor_id;
  j["display_name"] = c.display_name;
  Json aliases = Json::array();
  for (const auto& a : c.aliases) {
    if (include_demographics || a.find('@') == std::string::npos) aliases.push_back(a);
  }
  j["aliases"] = std::move(aliases);
  j["first_event"] = c.first_event;
  j["last_event"] = c.last_event;
  j["status"] = to_string(c.status);
  if (include_demographics) {
    j["emails"] = c.emails;
    j["affiliation"] = c.affiliation;
    if (c.demographics) j["demographics"] = to_json(*c.demographics);
  }
  return j;
}

inline Json to_json(const LifecyclePolicy& p) {
  Json j;
  j["inactive_after_days"] = p.inactive_after_days;
  j["departed_after_days"] = p.departed_after_days;
  j["newcomer_within_days"] = p.newcomer_within_days;
  j["as_of"] = p.as_of ? Json(*p.as_of) : Json(nullptr);
  return j;
}

}  // namespace retain
