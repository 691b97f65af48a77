#pragma once

#include <string>

#include "retain/core/demographics.hpp"
#include "retain/core/identity.hpp"

namespace retain {

// Records a contributor's own demographic answers (or an operator correction
// when payload.source is corrected). Absent fields stay as they were.
inline Contributor record_self_report(Community& community, const std::string& contributor_id, Demographics payload,
                                      const DemographicPrecedence& precedence = {}) {
  Contributor* c = community.find(contributor_id);
  if (!c) fail(ErrorKind::not_found, "unknown contributor " + contributor_id);
  if (payload.source == DemographicSource::inferred) payload.source = DemographicSource::self_reported;
  payload.confidence = 1.0;
  apply_demographics(*c, payload, precedence);
  return *c;
}

}  // namespace retain
