#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "retain/core/types.hpp"
#include "retain/survival/records.hpp"

namespace retain {

// Product-limit estimate listed at every distinct observed time (events and
// censorings), so at_risk is strictly decreasing.
struct KMCurve {
  std::string group_label;
  std::vector<std::int64_t> times;
  std::vector<double> survival;
  std::vector<int> at_risk;
  std::vector<int> events;
  std::vector<int> censored;

  // S(t): 1 before the first listed time.
  double survival_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t, [](double v, std::int64_t x) { return v < static_cast<double>(x); });
    if (it == times.begin()) return 1.0;
    return survival[static_cast<std::size_t>(it - times.begin()) - 1];
  }
};

inline KMCurve km_curve(std::span<const std::int64_t> duration, std::span<const int> event, std::string label = "all") {
  const std::size_t n = duration.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return duration[a] < duration[b]; });
  KMCurve curve;
  curve.group_label = std::move(label);
  int at_risk = static_cast<int>(n);
  double s = 1.0;
  for (std::size_t k = 0; k < n;) {
    const auto t = duration[order[k]];
    int d = 0, c = 0;
    for (; k < n && duration[order[k]] == t; ++k) (event[order[k]] ? d : c)++;
    s *= 1.0 - static_cast<double>(d) / at_risk;
    curve.times.push_back(t);
    curve.survival.push_back(s);
    curve.at_risk.push_back(at_risk);
    curve.events.push_back(d);
    curve.censored.push_back(c);
    at_risk -= d + c;
  }
  return curve;
}

struct KMResult {
  std::vector<KMCurve> curves;
  std::vector<std::string> warnings;
};

// One curve overall, or one per group_label ("unknown" when unlabeled).
// `expected_groups` lets callers name groups that should appear; empty ones
// are omitted with a warning.
inline KMResult km_estimate(std::span<const SurvivalRecord> records, bool group_by,
                            std::span<const std::string> expected_groups = {}) {
  std::map<std::string, std::pair<std::vector<std::int64_t>, std::vector<int>>> groups;
  for (const auto& g : expected_groups) groups[g];
  for (const auto& r : records) {
    const std::string label = group_by ? r.group_label.value_or(std::string(kUnknown)) : "all";
    auto& [d, e] = groups[label];
    d.push_back(r.duration_days);
    e.push_back(r.event);
  }
  KMResult out;
  for (auto& [label, de] : groups) {
    if (de.first.empty()) {
      out.warnings.push_back("group '" + label + "' has no records; omitted");
      continue;
    }
    out.curves.push_back(km_curve(de.first, de.second, label));
  }
  return out;
}

inline Json to_json(const KMCurve& c) {
  Json j;
  j["group_label"] = c.group_label;
  j["times"] = c.times;
  j["survival"] = c.survival;
  j["at_risk"] = c.at_risk;
  j["events"] = c.events;
  j["censored"] = c.censored;
  return j;
}

}  // namespace retain
