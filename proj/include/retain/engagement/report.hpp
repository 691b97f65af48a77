#pragma once

#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "retain/core/identity.hpp"
#include "retain/metrics/overview.hpp"
#include "retain/survival/model.hpp"

namespace retain {

inline constexpr int kDefaultReportPeriodDays = 30;

struct ProjectReport {
  Timestamp as_of = 0;
  int period_days = kDefaultReportPeriodDays;
  int newcomer_count = 0;
  int inactive_count = 0;
  double turnover_rate = 0.0;
  double prior_turnover_rate = 0.0;
  double turnover_delta = 0.0;
  // Absent when no model has been fitted.
  std::optional<std::vector<RiskScore>> top_at_risk;
};

// Health report for the period ending at the community's as_of, with the
// turnover change against the preceding period of equal length.
inline ProjectReport generate_report(const Community& community, std::span<const ContributionEvent> events,
                                     const std::optional<std::vector<RiskScore>>& risk,
                                     int period_days = kDefaultReportPeriodDays) {
  if (period_days < 1) fail(ErrorKind::validation, "report period must be at least one day");
  ProjectReport r;
  r.period_days = period_days;
  r.as_of = community.policy.as_of.value_or(0);
  if (risk) {
    std::vector<RiskScore> top(risk->begin(), risk->begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(10, risk->size())));
    r.top_at_risk = std::move(top);
  }
  if (community.contributors.empty()) return r;

  const Window current{r.as_of - days(period_days), r.as_of};
  const Window prior{r.as_of - days(2 * period_days), r.as_of - days(period_days)};
  const auto now_metrics = overview_metrics(community, events, community.policy, current);
  const auto prior_metrics = overview_metrics(community, events, community.policy, prior);
  r.newcomer_count = now_metrics.newcomer_count;
  r.inactive_count = static_cast<int>(list_inactive(community.contributors, community.policy).size());
  r.turnover_rate = now_metrics.turnover_rate;
  r.prior_turnover_rate = prior_metrics.turnover_rate;
  r.turnover_delta = r.turnover_rate - r.prior_turnover_rate;
  return r;
}

inline Json to_json(const ProjectReport& r) {
  Json j;
  j["as_of"] = r.as_of;
  j["period_days"] = r.period_days;
  j["newcomer_count"] = r.newcomer_count;
  j["inactive_count"] = r.inactive_count;
  j["turnover_rate"] = r.turnover_rate;
  j["prior_turnover_rate"] = r.prior_turnover_rate;
  j["turnover_delta"] = r.turnover_delta;
  if (r.top_at_risk) {
    j["top_at_risk"] = to_json(std::span<const RiskScore>(*r.top_at_risk));
  } else {
    j["top_at_risk"] = nullptr;
    j["note"] = "no model";
  }
  return j;
}

inline std::string render_report_text(const ProjectReport& r, const std::string& project) {
  std::ostringstream out;
  out << "Community health report for " << project << " (period of " << r.period_days << " days ending "
      << format_iso8601(r.as_of) << ")\n";
  out << "Newcomers: " << r.newcomer_count << "\n";
  out << "Inactive contributors: " << r.inactive_count << "\n";
  out << "Turnover rate: " << r.turnover_rate << " (change vs prior period: " << r.turnover_delta << ")\n";
  if (!r.top_at_risk) {
    out << "At-risk contributors: no model\n";
  } else {
    out << "At-risk contributors:\n";
    for (const auto& s : *r.top_at_risk) out << "  " << s.rank << ". " << s.contributor_id << " (" << s.score << ")\n";
  }
  return out.str();
}

}  // namespace retain
