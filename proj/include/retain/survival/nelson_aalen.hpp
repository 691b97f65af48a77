#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "retain/survival/step_function.hpp"

namespace retain {

// Cumulative hazard sum_{t_k <= t} d_k / n_k, with jumps at distinct event
// times. `weights` (bootstrap multiplicities) default to 1.
inline StepFunction nelson_aalen(std::span<const double> time, std::span<const int> event,
                                 std::span<const double> weights = {}) {
  const std::size_t n = time.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  double at_risk = 0.0;
  for (std::size_t i = 0; i < n; ++i) at_risk += w(i);

  StepFunction chf;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < n;) {
    const double t = time[order[k]];
    double deaths = 0.0, leaving = 0.0;
    for (; k < n && time[order[k]] == t; ++k) {
      leaving += w(order[k]);
      if (event[order[k]]) deaths += w(order[k]);
    }
    if (deaths > 0.0) {
      cumulative += deaths / at_risk;
      chf.times.push_back(t);
      chf.values.push_back(cumulative);
    }
    at_risk -= leaving;
  }
  return chf;
}

}  // namespace retain
