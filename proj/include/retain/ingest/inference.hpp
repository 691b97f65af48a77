#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "retain/core/demographics.hpp"
#include "retain/core/identity.hpp"
#include "retain/core/types.hpp"

namespace retain {

struct InferenceResult {
  std::string gender;
  std::string region;
  double confidence = 0.0;
};

struct ScoredGuess {
  std::string value;
  double confidence = 0.0;
};

// Two-step name inference boundary. Implementations must be safe to call
// concurrently and report transport problems by throwing ErrorKind::transport.
class InferencePlugin {
 public:
  virtual ~InferencePlugin() = default;
  // Geographic origin of a full name, optionally steered by a location hint.
  virtual std::optional<ScoredGuess> infer_region(const std::string& full_name,
                                                  const std::optional<std::string>& location_hint) const = 0;
  // Gender given the full name and the region inferred in step one.
  virtual std::optional<ScoredGuess> infer_gender(const std::string& full_name, const std::string& region) const = 0;
};

// Deterministic lookup table keyed by lowercased full name.
class TableInferencePlugin final : public InferencePlugin {
 public:
  struct Entry {
    std::string region;
    double region_confidence = 0.0;
    std::string gender;
    double gender_confidence = 0.0;
  };

  TableInferencePlugin() = default;
  explicit TableInferencePlugin(std::map<std::string, Entry> table) : table_(std::move(table)) {}

  void add(const std::string& full_name, Entry entry) { table_[detail::lowercase(full_name)] = std::move(entry); }

  const std::map<std::string, Entry>& entries() const { return table_; }

  std::optional<ScoredGuess> infer_region(const std::string& full_name,
                                          const std::optional<std::string>&) const override {
    auto it = table_.find(detail::lowercase(full_name));
    if (it == table_.end()) return std::nullopt;
    return ScoredGuess{it->second.region, it->second.region_confidence};
  }

  std::optional<ScoredGuess> infer_gender(const std::string& full_name, const std::string& region) const override {
    auto it = table_.find(detail::lowercase(full_name));
    if (it == table_.end() || it->second.region != region) return std::nullopt;
    return ScoredGuess{it->second.gender, it->second.gender_confidence};
  }

 private:
  std::map<std::string, Entry> table_;
};

inline constexpr double kDefaultInferenceThreshold = 0.9;

struct InferenceOutcome {
  std::optional<InferenceResult> result;
  std::optional<std::string> retryable_error;
};

// Region first, then gender conditioned on that region. The combined
// confidence is the weaker step; anything under `threshold` is dropped.
inline InferenceOutcome infer_demographics(const std::string& full_name,
                                           const std::optional<std::string>& location_hint,
                                           const InferencePlugin& plugin, double threshold) {
  InferenceOutcome out;
  if (full_name.empty()) return out;
  try {
    const auto region = plugin.infer_region(full_name, location_hint);
    if (!region) return out;
    const auto gender = plugin.infer_gender(full_name, region->value);
    if (!gender) return out;
    const double confidence = std::min(region->confidence, gender->confidence);
    if (confidence < threshold) return out;
    out.result = InferenceResult{gender->value, region->value, confidence};
  } catch (const Error& ex) {
    if (ex.kind() != ErrorKind::transport) throw;
    out.retryable_error = "inference for '" + full_name + "' failed: " + ex.what();
  }
  return out;
}

// Runs inference for every contributor lacking demographics. Returns the
// retryable error records.
inline std::vector<std::string> infer_community_demographics(Community& community, const InferencePlugin& plugin,
                                                             double threshold) {
  std::vector<std::string> errors;
  for (auto& c : community.contributors) {
    auto outcome = infer_demographics(c.display_name, std::nullopt, plugin, threshold);
    if (outcome.retryable_error) errors.push_back(*outcome.retryable_error);
    if (!outcome.result) continue;
    Demographics d;
    d.gender = outcome.result->gender;
    d.region = outcome.result->region;
    d.confidence = outcome.result->confidence;
    d.source = DemographicSource::inferred;
    apply_demographics(c, d);
  }
  return errors;
}

}  // namespace retain
