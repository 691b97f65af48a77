#pragma once

#include <algorithm>
#include <vector>

#include "retain/json.hpp"

namespace retain {

// Right-continuous step function; value 0 before the first jump.
struct StepFunction {
  std::vector<double> times;   // ascending
  std::vector<double> values;  // value on [times[k], times[k+1])

  double operator()(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0.0;
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
  }

  bool operator==(const StepFunction&) const = default;
};

inline Json to_json(const StepFunction& f) { return Json{{"times", f.times}, {"values", f.values}}; }

inline StepFunction step_function_from_json(const Json& j) {
  StepFunction f;
  f.times = j.at("times").get<std::vector<double>>();
  f.values = j.at("values").get<std::vector<double>>();
  return f;
}

}  // namespace retain
