#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "retain/core/types.hpp"
#include "retain/survival/records.hpp"

namespace retain {

// Two-sample log-rank numerator and variance. `in_first` marks group 1;
// observations are visited in `order`, which must sort them by time.
struct LogRankParts {
  double observed_minus_expected = 0.0;
  double variance = 0.0;

  double chi_square() const {
    return variance > 0.0 ? observed_minus_expected * observed_minus_expected / variance : 0.0;
  }
};

template <typename TimeAt, typename EventAt, typename InFirst>
LogRankParts logrank_parts(std::span<const std::size_t> order, TimeAt time_at, EventAt event_at, InFirst in_first,
                           std::span<const double> weights = {}) {
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double n = 0.0, n1 = 0.0;
  for (auto i : order) {
    n += w(i);
    if (in_first(i)) n1 += w(i);
  }
  LogRankParts parts;
  for (std::size_t k = 0; k < order.size();) {
    const double t = time_at(order[k]);
    double d = 0.0, d1 = 0.0, leaving = 0.0, leaving1 = 0.0;
    for (; k < order.size() && time_at(order[k]) == t; ++k) {
      const auto i = order[k];
      leaving += w(i);
      if (in_first(i)) leaving1 += w(i);
      if (event_at(i)) {
        d += w(i);
        if (in_first(i)) d1 += w(i);
      }
    }
    if (d > 0.0 && n > 0.0) {
      parts.observed_minus_expected += d1 - d * n1 / n;
      if (n > 1.0) parts.variance += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0);
    }
    n -= leaving;
    n1 -= leaving1;
  }
  return parts;
}

// Upper tail of the chi-square distribution with one degree of freedom.
inline double chi_square_1df_sf(double x) { return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(x / 2.0)); }

struct LogRankResult {
  double chi_square = 0.0;
  double p_value = 1.0;
  std::vector<std::string> groups;
};

inline LogRankResult logrank_test(std::span<const SurvivalRecord> records) {
  std::map<std::string, int> labels;
  for (const auto& r : records) labels[r.group_label.value_or(std::string(kUnknown))]++;
  if (labels.size() != 2) {
    fail(ErrorKind::validation, "log-rank test needs exactly 2 groups, got " + std::to_string(labels.size()));
  }
  const std::string first = labels.begin()->first;
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].duration_days < records[b].duration_days; });
  const auto parts = logrank_parts(
      std::span<const std::size_t>(order), [&](std::size_t i) { return static_cast<double>(records[i].duration_days); },
      [&](std::size_t i) { return records[i].event != 0; },
      [&](std::size_t i) { return records[i].group_label.value_or(std::string(kUnknown)) == first; });
  LogRankResult out;
  out.chi_square = parts.chi_square();
  out.p_value = chi_square_1df_sf(out.chi_square);
  for (const auto& [g, n] : labels) out.groups.push_back(g);
  return out;
}

inline Json to_json(const LogRankResult& r) {
  Json j;
  j["groups"] = r.groups;
  j["chi_square"] = r.chi_square;
  j["p_value"] = r.p_value;
  return j;
}

}  // namespace retain
