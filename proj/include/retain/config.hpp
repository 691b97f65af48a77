#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "retain/core/types.hpp"
#include "retain/impact/impact.hpp"
#include "retain/ingest/affiliation.hpp"
#include "retain/ingest/inference.hpp"
#include "retain/io.hpp"
#include "retain/json.hpp"

namespace retain {

// Operator settings, read from retain.json in the data directory.
struct Config {
  LifecyclePolicy policy;
  double inference_threshold = kDefaultInferenceThreshold;
  std::set<std::string> public_domains = default_public_domains();
  std::uint64_t default_seed = 42;
  bool exclude_bots = true;
  std::string token_env = "GITHUB_TOKEN";
  std::optional<std::string> inference_table;  // path to a name table for the built-in plugin
  double moderate_share = kDefaultModerateShare;
  int feature_window_days = 90;
  int report_period_days = 30;
  int pbkdf2_iterations = 120000;
  int session_ttl_hours = 24;
  int request_cap_per_token = 100000;
  std::optional<int> daily_message_cap;
  bool corrections_override_self_reports = true;
  bool contributors_view_own_record = false;
  std::string project_url;
  std::string survey_link;
};

namespace detail {

template <typename T>
T config_value(const Json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    fail(ErrorKind::validation, "config key '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline Config config_from_json(const Json& j) {
  static const std::set<std::string> known = {
      "inactive_after_days", "departed_after_days", "newcomer_within_days", "inference_threshold", "public_domains",
      "default_seed", "exclude_bots", "token_env", "inference_table", "moderate_share", "feature_window_days",
      "report_period_days", "pbkdf2_iterations", "session_ttl_hours", "request_cap_per_token", "daily_message_cap",
      "corrections_override_self_reports", "contributors_view_own_record", "project_url", "survey_link"};
  if (!j.is_object()) fail(ErrorKind::validation, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail(ErrorKind::validation, "unknown config key '" + key + "'");
  }
  Config c;
  using detail::config_value;
  c.policy.inactive_after_days = config_value(j, "inactive_after_days", c.policy.inactive_after_days);
  c.policy.departed_after_days = config_value(j, "departed_after_days", c.policy.departed_after_days);
  c.policy.newcomer_within_days = config_value(j, "newcomer_within_days", c.policy.newcomer_within_days);
  try {
    validate(c.policy);
  } catch (const Error& e) {
    fail(ErrorKind::validation, std::string("config key 'inactive_after_days'/'departed_after_days'/"
                                            "'newcomer_within_days': ") + e.what());
  }
  c.inference_threshold = config_value(j, "inference_threshold", c.inference_threshold);
  if (c.inference_threshold < 0.0 || c.inference_threshold > 1.0) {
    fail(ErrorKind::validation, "config key 'inference_threshold' must be in [0,1]");
  }
  if (j.contains("public_domains")) {
    const auto extra = config_value(j, "public_domains", std::set<std::string>{});
    c.public_domains.insert(extra.begin(), extra.end());
  }
  c.default_seed = config_value(j, "default_seed", c.default_seed);
  c.exclude_bots = config_value(j, "exclude_bots", c.exclude_bots);
  c.token_env = config_value(j, "token_env", c.token_env);
  if (j.contains("inference_table")) c.inference_table = config_value(j, "inference_table", std::string());
  c.moderate_share = config_value(j, "moderate_share", c.moderate_share);
  c.feature_window_days = config_value(j, "feature_window_days", c.feature_window_days);
  if (c.feature_window_days < 1) fail(ErrorKind::validation, "config key 'feature_window_days' must be >= 1");
  c.report_period_days = config_value(j, "report_period_days", c.report_period_days);
  if (c.report_period_days < 1) fail(ErrorKind::validation, "config key 'report_period_days' must be >= 1");
  c.pbkdf2_iterations = config_value(j, "pbkdf2_iterations", c.pbkdf2_iterations);
  if (c.pbkdf2_iterations < 1) fail(ErrorKind::validation, "config key 'pbkdf2_iterations' must be >= 1");
  c.session_ttl_hours = config_value(j, "session_ttl_hours", c.session_ttl_hours);
  c.request_cap_per_token = config_value(j, "request_cap_per_token", c.request_cap_per_token);
  if (j.contains("daily_message_cap")) c.daily_message_cap = config_value(j, "daily_message_cap", 0);
  c.corrections_override_self_reports =
      config_value(j, "corrections_override_self_reports", c.corrections_override_self_reports);
  c.contributors_view_own_record = config_value(j, "contributors_view_own_record", c.contributors_view_own_record);
  c.project_url = config_value(j, "project_url", c.project_url);
  c.survey_link = config_value(j, "survey_link", c.survey_link);
  return c;
}

inline constexpr const char* kConfigFileName = "retain.json";

// Absent file means defaults.
inline Config load_config(const std::filesystem::path& data_dir) {
  const auto path = data_dir / kConfigFileName;
  if (!std::filesystem::exists(path)) return {};
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::validation, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

inline TableInferencePlugin load_inference_table(const Config& c) {
  TableInferencePlugin plugin;
  if (!c.inference_table) return plugin;
  const auto j = Json::parse(read_file(*c.inference_table));
  for (const auto& [name, entry] : j.items()) {
    plugin.add(name, {entry.at("region").get<std::string>(), entry.at("region_confidence").get<double>(),
                      entry.at("gender").get<std::string>(), entry.at("gender_confidence").get<double>()});
  }
  return plugin;
}

}  // namespace retain
