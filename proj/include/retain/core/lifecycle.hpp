#pragma once

#include <algorithm>
#include <cstdint>
#include <span>

#include "retain/core/types.hpp"

namespace retain {

// Fills in as_of from the latest event when the policy leaves it open.
inline LifecyclePolicy resolve_policy(LifecyclePolicy policy, std::span<const ContributionEvent> events) {
  validate(policy);
  if (!policy.as_of) {
    Timestamp latest = 0;
    for (const auto& e : events) latest = std::max(latest, e.timestamp);
    policy.as_of = latest;
  }
  return policy;
}

inline std::int64_t inactivity_gap_days(const Contributor& c, Timestamp as_of) {
  return floor_days(as_of - c.last_event);
}

// newcomer / active / inactive / departed at policy.as_of. Exactly one status
// for every valid input; newcomer only outranks active.
inline Status classify_status(const Contributor& c, const LifecyclePolicy& policy) {
  validate(policy);
  if (!policy.as_of) fail(ErrorKind::validation, "lifecycle policy has no as_of instant");
  const Timestamp as_of = *policy.as_of;
  if (c.last_event > as_of) {
    fail(ErrorKind::validation,
         "contributor " + c.contributor_id + " has activity after as_of (future activity)");
  }
  const auto gap = inactivity_gap_days(c, as_of);
  if (gap >= policy.departed_after_days) return Status::departed;
  if (gap >= policy.inactive_after_days) return Status::inactive;
  if (floor_days(as_of - c.first_event) <= policy.newcomer_within_days) return Status::newcomer;
  return Status::active;
}

inline std::int64_t compute_tenure(const Contributor& c) {
  return std::max<std::int64_t>(1, floor_days(c.last_event - c.first_event));
}

}  // namespace retain
