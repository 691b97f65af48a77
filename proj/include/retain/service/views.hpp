#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retain/engagement/report.hpp"
#include "retain/impact/impact.hpp"
#include "retain/metrics/overview.hpp"
#include "retain/service/store.hpp"
#include "retain/survival/kaplan_meier.hpp"
#include "retain/survival/logrank.hpp"
#include "retain/survival/model.hpp"
#include "retain/survival/records.hpp"

namespace retain {

inline constexpr int kDefaultOverviewDays = 365;
inline constexpr int kDefaultTopContributors = 10;

inline const std::vector<Lens>& demographic_lenses() {
  static const std::vector<Lens> lenses = {Lens::affiliation, Lens::gender, Lens::region};
  return lenses;
}

inline bool is_demographic(Lens lens) { return lens != Lens::newcomer_status; }

// Activity columns used for fitting when none are named: everything except
// total_events, which is the sum of the per-kind counts.
inline std::vector<std::string> default_fit_features() {
  std::vector<std::string> out;
  for (const auto& f : activity_feature_names()) {
    if (f != "total_events") out.push_back(f);
  }
  return out;
}

inline Timestamp snapshot_as_of(const ProjectSnapshot& snap) { return snap.community.policy.as_of.value_or(0); }

inline OverviewMetrics overview_for(const ProjectSnapshot& snap, std::optional<Timestamp> start,
                                    std::optional<Timestamp> end) {
  const Timestamp e = end.value_or(snapshot_as_of(snap));
  if (snap.community.contributors.empty()) {
    const Timestamp s = start.value_or(e > 0 ? e - days(kDefaultOverviewDays) : 0);
    OverviewMetrics m;
    m.window_start = s;
    m.window_end = e;
    return m;
  }
  const Timestamp s = start.value_or(e - days(kDefaultOverviewDays));
  return overview_metrics(snap.community, snap.events, snap.community.policy, {s, e});
}

inline Json overview_view(const ProjectSnapshot& snap, std::optional<Timestamp> start, std::optional<Timestamp> end,
                          bool include_demographics) {
  Json j = to_json(overview_for(snap, start, end));
  if (include_demographics) {
    Json d = Json::object();
    for (Lens lens : demographic_lenses()) {
      d[std::string(to_string(lens))] = to_json(demographic_distribution(snap.community.contributors, lens));
    }
    j["demographics"] = std::move(d);
  }
  return j;
}

inline Json activity_view(const ProjectSnapshot& snap, int bucket_days, std::optional<Timestamp> start,
                          std::optional<Timestamp> end) {
  if (snap.events.empty()) {
    if (bucket_days < 1) fail(ErrorKind::validation, "bucket_days must be at least 1");
    return to_json(ActivitySeries{bucket_days, {}});
  }
  Timestamp first = snap.events.front().timestamp;
  for (const auto& e : snap.events) first = std::min(first, e.timestamp);
  const Window w{start.value_or(floor_days(first) * kSecondsPerDay), end.value_or(snapshot_as_of(snap))};
  return to_json(activity_timeseries(snap.events, snap.community, bucket_days, w));
}

inline Json distribution_view(const ProjectSnapshot& snap, Lens lens) {
  Json j;
  j["lens"] = to_string(lens);
  j["total"] = snap.community.contributors.size();
  j["groups"] = to_json(demographic_distribution(snap.community.contributors, lens));
  return j;
}

inline SurvivalData survival_data_for(const ProjectSnapshot& snap, int feature_window_days,
                                      std::optional<Lens> group_by = std::nullopt) {
  if (snap.community.contributors.empty()) return SurvivalData{activity_feature_names(), {}};
  SurvivalData data = build_survival_records(snap.community, snap.events_by_id, feature_window_days);
  if (group_by) {
    for (auto& r : data.records) r.group_label = lens_group(*snap.community.find(r.contributor_id), *group_by);
  }
  return data;
}

inline Json survival_view(const ProjectSnapshot& snap, std::optional<Lens> group_by, int feature_window_days) {
  const auto data = survival_data_for(snap, feature_window_days, group_by);
  const auto km = km_estimate(data.records, group_by.has_value());
  Json j;
  j["group_by"] = group_by ? Json(std::string(to_string(*group_by))) : Json(nullptr);
  j["curves"] = Json::array();
  for (const auto& c : km.curves) j["curves"].push_back(to_json(c));
  j["warnings"] = km.warnings;
  if (group_by && km.curves.size() == 2) {
    j["logrank"] = to_json(logrank_test(data.records));
  } else {
    j["logrank"] = nullptr;
  }
  return j;
}

inline Json contributor_view(const ProjectSnapshot& snap, const std::string& contributor_id,
                             bool include_demographics) {
  const Contributor* c = snap.community.find(contributor_id);
  if (!c) fail(ErrorKind::not_found, "unknown contributor " + contributor_id);
  Json j = to_json(*c, include_demographics);
  j["tenure_days"] = compute_tenure(*c);
  j["gap_days"] = inactivity_gap_days(*c, snapshot_as_of(snap));
  for (const auto& s : impact_score(snap.events_by_id)) {
    if (s.contributor_id == contributor_id) {
      j["impact"] = {{"raw_count", s.raw_count}, {"weighted_count", s.weighted_count}, {"score", s.score}};
    }
  }
  std::map<std::string, int> tags;
  Json history = Json::array();
  for (const auto& e : snap.events_by_id.at(contributor_id)) {
    for (const auto& t : e.tags) ++tags[t];
    history.push_back({{"event_id", e.event_id},
                       {"timestamp", e.timestamp},
                       {"kind", to_string(e.kind)},
                       {"repo", e.repo},
                       {"tags", e.tags}});
  }
  j["tags"] = tags;
  j["history"] = std::move(history);
  return j;
}

inline Json tags_view(const ProjectSnapshot& snap) {
  Json j = Json::array();
  for (const auto& p : tag_distribution(snap.events_by_id)) j.push_back(to_json(p));
  return j;
}

inline Json tag_view(const ProjectSnapshot& snap, const std::string& tag, int k = kDefaultTopContributors) {
  for (const auto& p : tag_distribution(snap.events_by_id)) {
    if (p.tag != tag) continue;
    Json j = to_json(p);
    const auto top = top_contributors_for_tag(p, k);
    j["top_contributors"] = to_json(std::span<const TagRanking>(top));
    return j;
  }
  fail(ErrorKind::not_found, "unknown tag '" + tag + "'");
}

inline Json newcomers_view(const ProjectSnapshot& snap) {
  if (snap.community.contributors.empty()) return Json::array();
  const auto roster = list_newcomers(snap.community.contributors, snap.community.policy);
  return to_json(std::span<const RosterEntry>(roster));
}

inline Json inactive_view(const ProjectSnapshot& snap) {
  if (snap.community.contributors.empty()) return Json::array();
  const auto roster = list_inactive(snap.community.contributors, snap.community.policy);
  return to_json(std::span<const RosterEntry>(roster));
}

// Ranks contributors who have not departed.
inline std::vector<RiskScore> risk_for(const ProjectSnapshot& snap, const FittedModel& model) {
  SurvivalData data = survival_data_for(snap, model.options.feature_window_days);
  std::erase_if(data.records, [](const SurvivalRecord& r) { return r.event != 0; });
  return predict_risk(model, data);
}

inline Json impact_view(const ProjectSnapshot& snap, const std::optional<std::vector<RiskScore>>& risk,
                        double moderate_share) {
  const auto scores = impact_score(snap.events_by_id);
  const auto profiles = tag_distribution(snap.events_by_id);
  std::set<std::string> at_risk;
  if (risk) {
    for (std::size_t i = 0; i < risk->size() && i < static_cast<std::size_t>(kDefaultTopContributors); ++i) {
      at_risk.insert((*risk)[i].contributor_id);
    }
  }
  Json j;
  j["scores"] = to_json(std::span<const ImpactScore>(scores));
  j["attrition"] = Json::array();
  for (const auto& c : snap.community.contributors) {
    j["attrition"].push_back(to_json(attrition_impact(c.contributor_id, profiles, at_risk, moderate_share)));
  }
  return j;
}

struct FitRequest {
  ModelKind kind = ModelKind::cox;
  std::vector<std::string> features;
  int feature_window_days = kDefaultFeatureWindowDays;
  std::uint64_t seed = 42;
  double train_fraction = 0.7;
  int trees = 100;
};

inline FittedModel fit_for(const ProjectSnapshot& snap, const FitRequest& req) {
  ModelOptions options;
  options.features = req.features.empty() ? default_fit_features() : req.features;
  options.feature_window_days = req.feature_window_days;
  options.train_fraction = req.train_fraction;
  options.forest.trees = req.trees;
  return fit_model(survival_data_for(snap, req.feature_window_days), req.kind, options, req.seed);
}

}  // namespace retain
