#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "retain/core/types.hpp"
#include "retain/random.hpp"

namespace retain {

struct SyntheticSpec {
  std::uint64_t seed = 42;
  int n_contributors = 100;
  int horizon_days = 365;
  std::map<std::string, double> group_shares;
  std::map<std::string, double> group_hazard_per_day;
  double events_per_active_week = 2.0;
  // Joins are spread uniformly over this many days from the start.
  int join_spread_days = 0;
  // Silence appended after the horizon so departures are observable.
  int detection_tail_days = 365;
  Timestamp start = 1577836800;  // 2020-01-01T00:00:00Z
  std::string repo = "synthetic/community";
};

inline void validate(const SyntheticSpec& s) {
  if (s.n_contributors < 0) fail(ErrorKind::validation, "n_contributors must be non-negative");
  if (s.horizon_days < 1) fail(ErrorKind::validation, "horizon_days must be at least 1");
  if (s.events_per_active_week <= 0.0) fail(ErrorKind::validation, "events_per_active_week must be positive");
  if (s.join_spread_days < 0 || s.detection_tail_days < 0) {
    fail(ErrorKind::validation, "join_spread_days and detection_tail_days must be non-negative");
  }
  if (s.group_shares.empty()) fail(ErrorKind::validation, "group_shares must name at least one group");
  double total = 0.0;
  for (const auto& [group, share] : s.group_shares) {
    if (share < 0.0) fail(ErrorKind::validation, "group share for '" + group + "' is negative");
    total += share;
    auto h = s.group_hazard_per_day.find(group);
    if (h == s.group_hazard_per_day.end()) fail(ErrorKind::validation, "no hazard for group '" + group + "'");
    if (!(h->second >= 0.0 && h->second <= 1.0)) {
      fail(ErrorKind::validation, "hazard for group '" + group + "' outside [0,1]");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) fail(ErrorKind::validation, "group shares must sum to 1");
}

struct SyntheticTruth {
  std::string contributor_key;
  std::string group;
  int join_day = 0;
  // Days from join to the last contribution when departed within the horizon.
  std::optional<std::int64_t> departure_day;
  std::int64_t duration_days = 0;
  int event = 0;
};

struct SyntheticCommunity {
  std::vector<ContributionEvent> events;
  std::vector<SyntheticTruth> truth;
  Timestamp observation_end = 0;
};

// Constant-hazard community: each member draws a geometric departure day and
// contributes at a Poisson weekly rate until departure or the end of
// observation. The first contribution lands at 00:00 of the join day and the
// last at 12:00 of its final day, so whole-day arithmetic recovers the truth.
inline SyntheticCommunity generate_synthetic_community(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  SyntheticCommunity out;

  // Largest-remainder allocation, then a seeded shuffle of the assignment.
  std::vector<std::string> groups;
  {
    std::vector<std::pair<double, std::string>> remainders;
    int assigned = 0;
    for (const auto& [g, share] : spec.group_shares) {
      const double exact = share * spec.n_contributors;
      const int whole = static_cast<int>(std::floor(exact));
      groups.insert(groups.end(), whole, g);
      assigned += whole;
      remainders.emplace_back(exact - whole, g);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < spec.n_contributors; ++i, ++assigned) {
      groups.push_back(remainders[i % remainders.size()].second);
    }
    rng.shuffle(groups);
  }

  const std::int64_t end_day =
      static_cast<std::int64_t>(spec.join_spread_days) + spec.horizon_days + spec.detection_tail_days;
  out.observation_end = spec.start + days(end_day) + 12 * 3600;

  static constexpr std::array<double, 5> kind_mix = {0.4, 0.15, 0.15, 0.1, 0.2};
  static const std::array<const char*, 5> tag_pool = {"api", "docs", "infra", "ui", "testing"};

  for (int i = 0; i < spec.n_contributors; ++i) {
    char key[32];
    std::snprintf(key, sizeof key, "dev%04d", i);
    SyntheticTruth truth;
    truth.contributor_key = key;
    truth.group = groups[static_cast<std::size_t>(i)];
    truth.join_day = spec.join_spread_days > 0 ? static_cast<int>(rng.below(spec.join_spread_days)) : 0;

    const auto draw = rng.geometric(spec.group_hazard_per_day.at(truth.group));
    std::int64_t span_days;
    if (draw <= spec.horizon_days) {
      truth.departure_day = draw;
      truth.event = 1;
      span_days = draw;
    } else {
      truth.event = 0;
      span_days = end_day - truth.join_day;
    }
    truth.duration_days = span_days;

    const std::string email = std::string(key) + "@" + truth.group + ".example";
    const std::string name = "Dev " + std::string(key + 3);
    const Timestamp join_ts = spec.start + days(truth.join_day);
    int serial = 0;
    auto emit = [&](Timestamp ts) {
      ContributionEvent e;
      char id[64];
      std::snprintf(id, sizeof id, "syn-%s-%05d", key, serial++);
      e.event_id = id;
      e.contributor_key = key;
      e.email = email;
      e.display_name = name;
      e.timestamp = ts;
      double u = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < kind_mix.size() && u >= kind_mix[k]) u -= kind_mix[k++];
      e.kind = kAllEventKinds[k];
      e.repo = spec.repo;
      if (e.kind != EventKind::commit && rng.uniform() < 0.5) e.tags.push_back(tag_pool[rng.below(tag_pool.size())]);
      out.events.push_back(std::move(e));
    };

    emit(join_ts);
    std::vector<Timestamp> interior;
    const std::int64_t weeks = (span_days + 6) / 7;
    for (std::int64_t w = 0; w < weeks; ++w) {
      const int count = rng.poisson(spec.events_per_active_week);
      for (int c = 0; c < count; ++c) {
        const std::int64_t day = w * 7 + static_cast<std::int64_t>(rng.below(7));
        const Timestamp second = static_cast<Timestamp>(rng.below(kSecondsPerDay));
        if (day < span_days && (day > 0 || second > 0)) interior.push_back(join_ts + days(day) + second);
      }
    }
    std::sort(interior.begin(), interior.end());
    for (Timestamp ts : interior) emit(ts);
    emit(join_ts + days(span_days) + 12 * 3600);
    out.truth.push_back(std::move(truth));
  }
  return out;
}

}  // namespace retain
