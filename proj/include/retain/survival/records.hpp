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

struct SurvivalRecord {
  std::string contributor_id;
  std::int64_t duration_days = 1;
  int event = 0;  // 1 = departed
  std::vector<double> covariates;
  std::optional<std::string> group_label;
};

// Records plus the names of their covariate columns.
struct SurvivalData {
  std::vector<std::string> feature_names;
  std::vector<SurvivalRecord> records;
};

// Column order produced by extract_features.
inline const std::vector<std::string>& activity_feature_names() {
  static const std::vector<std::string> names = {
      "n_commit", "n_pr_opened", "n_pr_review", "n_issue_opened", "n_issue_comment",
      "total_events", "active_weeks", "mean_gap_days"};
  return names;
}

inline constexpr int kDefaultFeatureWindowDays = 90;

// Activity summary over the first `window_days` whole days after the
// contributor's first event. Events must be sorted ascending.
inline std::vector<double> extract_features(std::span<const ContributionEvent> events, int window_days) {
  std::vector<double> f(activity_feature_names().size(), 0.0);
  if (events.empty()) return f;
  const Timestamp first = events.front().timestamp;
  std::set<std::int64_t> weeks;
  Timestamp last_in_window = first;
  int total = 0;
  for (const auto& e : events) {
    const auto offset = e.timestamp - first;
    if (floor_days(offset) >= window_days) continue;
    f[index_of(e.kind)] += 1.0;
    ++total;
    weeks.insert(offset / kSecondsPerWeek);
    last_in_window = std::max(last_in_window, e.timestamp);
  }
  f[5] = total;
  f[6] = static_cast<double>(weeks.size());
  f[7] = total < 2 ? 0.0 : static_cast<double>(last_in_window - first) / kSecondsPerDay / (total - 1);
  return f;
}

// One row per contributor: departed contributors contribute their tenure as
// an observed event; everyone else is right-censored at as_of.
inline SurvivalData build_survival_records(
    const Community& community, const std::map<std::string, std::vector<ContributionEvent>>& events_by_id,
    int feature_window_days = kDefaultFeatureWindowDays) {
  if (feature_window_days < 1) fail(ErrorKind::validation, "feature_window_days must be at least 1");
  SurvivalData data;
  data.feature_names = activity_feature_names();
  const Timestamp as_of = *community.policy.as_of;
  static const std::vector<ContributionEvent> none;
  for (const auto& c : community.contributors) {
    SurvivalRecord r;
    r.contributor_id = c.contributor_id;
    const Status status = classify_status(c, community.policy);
    r.event = status == Status::departed ? 1 : 0;
    r.duration_days = r.event ? compute_tenure(c) : std::max<std::int64_t>(1, floor_days(as_of - c.first_event));
    auto it = events_by_id.find(c.contributor_id);
    r.covariates = extract_features(it != events_by_id.end() ? it->second : none, feature_window_days);
    data.records.push_back(std::move(r));
  }
  return data;
}

// Restricts the data to the named columns, in the given order.
inline SurvivalData select_features(const SurvivalData& data, std::span<const std::string> names) {
  std::vector<std::size_t> columns;
  for (const auto& name : names) {
    auto it = std::find(data.feature_names.begin(), data.feature_names.end(), name);
    if (it == data.feature_names.end()) fail(ErrorKind::validation, "missing feature '" + name + "'");
    columns.push_back(static_cast<std::size_t>(it - data.feature_names.begin()));
  }
  SurvivalData out;
  out.feature_names.assign(names.begin(), names.end());
  out.records.reserve(data.records.size());
  for (const auto& r : data.records) {
    SurvivalRecord copy = r;
    copy.covariates.clear();
    for (auto c : columns) copy.covariates.push_back(r.covariates.at(c));
    out.records.push_back(std::move(copy));
  }
  return out;
}

inline Json to_json(const SurvivalRecord& r, std::span<const std::string> feature_names) {
  Json j;
  j["contributor_id"] = r.contributor_id;
  j["duration_days"] = r.duration_days;
  j["event"] = r.event;
  Json cov = Json::object();
  for (std::size_t i = 0; i < feature_names.size() && i < r.covariates.size(); ++i) cov[feature_names[i]] = r.covariates[i];
  j["covariates"] = std::move(cov);
  if (r.group_label) j["group_label"] = *r.group_label;
  return j;
}

}  // namespace retain
