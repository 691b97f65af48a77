#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "retain/core/types.hpp"

namespace retain {

using EventsById = std::map<std::string, std::vector<ContributionEvent>>;

struct ImpactScore {
  std::string contributor_id;
  int raw_count = 0;
  double weighted_count = 0.0;
  double score = 0.0;
};

// Weighted contribution count relative to the project's top contributor.
// Kinds missing from `weights` weigh 1; no weights means all kinds equal.
inline std::vector<ImpactScore> impact_score(const EventsById& events,
                                             const std::optional<std::map<EventKind, double>>& weights = std::nullopt) {
  auto weight = [&](EventKind k) {
    if (!weights) return 1.0;
    auto it = weights->find(k);
    return it == weights->end() ? 1.0 : it->second;
  };
  if (weights) {
    bool any_positive = false;
    for (EventKind k : kAllEventKinds) {
      if (weight(k) < 0.0) fail(ErrorKind::validation, "negative weight for kind " + std::string(to_string(k)));
      any_positive |= weight(k) > 0.0;
    }
    if (!any_positive) fail(ErrorKind::validation, "all contribution weights are zero");
  }
  std::vector<ImpactScore> out;
  double baseline = 0.0;
  for (const auto& [id, list] : events) {
    if (list.empty()) continue;
    ImpactScore s;
    s.contributor_id = id;
    s.raw_count = static_cast<int>(list.size());
    for (const auto& e : list) s.weighted_count += weight(e.kind);
    baseline = std::max(baseline, s.weighted_count);
    out.push_back(std::move(s));
  }
  if (out.empty()) fail(ErrorKind::validation, "impact scores need at least one contributor with an event");
  if (baseline <= 0.0) fail(ErrorKind::validation, "no contributor has positive weighted contributions");
  for (auto& s : out) s.score = s.weighted_count / baseline;
  std::sort(out.begin(), out.end(), [](const ImpactScore& a, const ImpactScore& b) {
    return a.score != b.score ? a.score > b.score : a.contributor_id < b.contributor_id;
  });
  return out;
}

struct TagProfile {
  std::string tag;
  int total_tagged_contributions = 0;
  std::map<std::string, int> per_contributor;
  std::string top_contributor;
};

inline std::vector<TagProfile> tag_distribution(const EventsById& events) {
  std::map<std::string, TagProfile> by_tag;
  for (const auto& [id, list] : events) {
    for (const auto& e : list) {
      for (const auto& tag : std::set<std::string>(e.tags.begin(), e.tags.end())) {
        auto& p = by_tag[tag];
        p.tag = tag;
        ++p.total_tagged_contributions;
        ++p.per_contributor[id];
      }
    }
  }
  std::vector<TagProfile> out;
  for (auto& [tag, p] : by_tag) {
    int best = -1;
    for (const auto& [id, count] : p.per_contributor) {
      if (count > best) {  // map order breaks ties toward the smaller id
        best = count;
        p.top_contributor = id;
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

struct TagRanking {
  std::string contributor_id;
  int count = 0;
  double share = 0.0;
};

inline std::vector<TagRanking> top_contributors_for_tag(const TagProfile& profile, int k) {
  if (k < 1) fail(ErrorKind::validation, "k must be at least 1");
  std::vector<TagRanking> out;
  for (const auto& [id, count] : profile.per_contributor) {
    out.push_back({id, count, static_cast<double>(count) / std::max(1, profile.total_tagged_contributions)});
  }
  std::stable_sort(out.begin(), out.end(), [](const TagRanking& a, const TagRanking& b) { return a.count > b.count; });
  if (out.size() > static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k));
  return out;
}

enum class Severity { low, moderate, critical };

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::low: return "low";
    case Severity::moderate: return "moderate";
    case Severity::critical: return "critical";
  }
  return "";
}

struct AffectedTag {
  std::string tag;
  double share = 0.0;
  bool is_top = false;
};

struct AttritionImpact {
  std::string contributor_id;
  std::vector<AffectedTag> affected_tags;
  Severity severity = Severity::low;
  bool at_risk = false;
};

inline constexpr double kDefaultModerateShare = 0.25;

// Critical when the contributor leads any tag; moderate when they hold at
// least `moderate_share` of some tag without leading one.
inline AttritionImpact attrition_impact(const std::string& contributor_id, std::span<const TagProfile> profiles,
                                        const std::set<std::string>& at_risk_set,
                                        double moderate_share = kDefaultModerateShare) {
  AttritionImpact out;
  out.contributor_id = contributor_id;
  out.at_risk = at_risk_set.count(contributor_id) > 0;
  bool top_anywhere = false, large_share = false;
  for (const auto& p : profiles) {
    auto it = p.per_contributor.find(contributor_id);
    if (it == p.per_contributor.end()) continue;
    AffectedTag a;
    a.tag = p.tag;
    a.share = static_cast<double>(it->second) / p.total_tagged_contributions;
    a.is_top = p.top_contributor == contributor_id;
    top_anywhere |= a.is_top;
    large_share |= a.share >= moderate_share;
    out.affected_tags.push_back(std::move(a));
  }
  out.severity = top_anywhere ? Severity::critical : large_share ? Severity::moderate : Severity::low;
  return out;
}

// ---- JSON ---------------------------------------------------------------

inline Json to_json(std::span<const ImpactScore> scores) {
  Json j = Json::array();
  for (const auto& s : scores) {
    Json sj;
    sj["contributor_id"] = s.contributor_id;
    sj["raw_count"] = s.raw_count;
    sj["weighted_count"] = s.weighted_count;
    sj["score"] = s.score;
    j.push_back(std::move(sj));
  }
  return j;
}

inline Json to_json(const TagProfile& p) {
  Json j;
  j["tag"] = p.tag;
  j["total_tagged_contributions"] = p.total_tagged_contributions;
  j["per_contributor"] = p.per_contributor;
  j["top_contributor"] = p.top_contributor;
  return j;
}

inline Json to_json(std::span<const TagRanking> ranking) {
  Json j = Json::array();
  for (const auto& r : ranking) j.push_back(Json{{"contributor_id", r.contributor_id}, {"count", r.count}, {"share", r.share}});
  return j;
}

inline Json to_json(const AttritionImpact& a) {
  Json j;
  j["contributor_id"] = a.contributor_id;
  j["severity"] = to_string(a.severity);
  j["at_risk"] = a.at_risk;
  j["affected_tags"] = Json::array();
  for (const auto& t : a.affected_tags) {
    j["affected_tags"].push_back(Json{{"tag", t.tag}, {"share", t.share}, {"is_top", t.is_top}});
  }
  return j;
}

}  // namespace retain
