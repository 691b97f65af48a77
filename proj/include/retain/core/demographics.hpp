#pragma once

#include "retain/core/types.hpp"

namespace retain {

struct DemographicPrecedence {
  // When false, a contributor's own report outranks an operator correction.
  bool corrections_override_self_reports = true;
};

inline int precedence_rank(DemographicSource s, const DemographicPrecedence& cfg) {
  switch (s) {
    case DemographicSource::inferred: return 0;
    case DemographicSource::self_reported: return cfg.corrections_override_self_reports ? 1 : 2;
    case DemographicSource::corrected: return cfg.corrections_override_self_reports ? 2 : 1;
  }
  return 0;
}

// Merges an incoming record into the contributor's effective demographics.
// Lower-precedence input is ignored; accepted input replaces only the fields
// it carries. Returns whether anything changed.
inline bool apply_demographics(Contributor& c, const Demographics& incoming,
                               const DemographicPrecedence& cfg = {}) {
  if (c.demographics &&
      precedence_rank(incoming.source, cfg) < precedence_rank(c.demographics->source, cfg)) {
    return false;
  }
  Demographics merged = c.demographics.value_or(Demographics{});
  if (incoming.gender) merged.gender = incoming.gender;
  if (incoming.region) merged.region = incoming.region;
  merged.source = incoming.source;
  merged.confidence = incoming.source == DemographicSource::inferred ? incoming.confidence : 1.0;
  c.demographics = merged;
  return true;
}

}  // namespace retain
