#pragma once

#include <json.hpp>

namespace retain {

// Insertion-ordered JSON: field order in output follows construction order,
// which keeps every serialized document byte-stable.
using Json = nlohmann::ordered_json;

}  // namespace retain
