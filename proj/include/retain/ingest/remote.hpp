#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "retain/core/types.hpp"
#include "retain/detail/httplib.hpp"

namespace retain {

enum class SourceKind { jsonl_file, remote_api, synthetic };

struct IngestSource {
  SourceKind kind = SourceKind::jsonl_file;
  // File path, API base URL, or synthetic seed spec.
  std::string location;
  // "owner/name"; remote_api only.
  std::string repository;
  std::optional<std::string> auth_token_env;
};

struct FetchOptions {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};
  // Upper bound on a single rate-limit wait.
  std::chrono::milliseconds max_reset_wait{std::chrono::minutes(60)};
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
  std::function<Timestamp()> now = [] {
    return static_cast<Timestamp>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
  };
};

struct FetchReport {
  std::vector<ContributionEvent> events;
  int requests = 0;
  int retries = 0;
  std::map<std::string, int> pages;  // endpoint -> pages fetched
};

namespace detail {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path + query
};

inline Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorKind::validation, "not an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Extracts the rel="next" target from an RFC 8288 Link header.
inline std::optional<std::string> next_link(const std::string& header) {
  std::size_t pos = 0;
  while (pos < header.size()) {
    const auto open = header.find('<', pos);
    if (open == std::string::npos) break;
    const auto close = header.find('>', open);
    if (close == std::string::npos) break;
    const auto next_entry = header.find('<', close);
    const auto params = header.substr(close + 1, next_entry == std::string::npos ? std::string::npos : next_entry - close - 1);
    if (params.find("rel=\"next\"") != std::string::npos) return header.substr(open + 1, close - open - 1);
    pos = close + 1;
  }
  return std::nullopt;
}

inline const Json& require(const Json& obj, const char* field, const std::string& endpoint) {
  if (!obj.is_object() || !obj.contains(field) || obj[field].is_null()) {
    fail(ErrorKind::parse, "endpoint " + endpoint + ": item missing required field '" + field + "'");
  }
  return obj[field];
}

inline std::string login_of(const Json& item, const std::string& endpoint) {
  const auto& user = require(item, "user", endpoint);
  return require(user, "login", endpoint).get<std::string>();
}

inline std::vector<std::string> label_tags(const Json& item) {
  std::vector<std::string> tags;
  std::set<std::string> seen;
  if (item.contains("labels") && item["labels"].is_array()) {
    for (const auto& label : item["labels"]) {
      std::string name = label.is_string() ? label.get<std::string>() : label.value("name", std::string());
      if (!name.empty() && seen.insert(name).second) tags.push_back(std::move(name));
    }
  }
  return tags;
}

inline std::string id_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace detail

// Maps one API item to an event; nullopt for items the endpoint does not own
// (pull requests showing up in /issues).
inline std::optional<ContributionEvent> map_remote_item(const std::string& endpoint, const Json& item,
                                                        const std::string& repo) {
  using detail::require;
  ContributionEvent e;
  e.repo = repo;
  if (endpoint == "commits") {
    e.event_id = "commit:" + require(item, "sha", endpoint).get<std::string>();
    const auto& commit = require(item, "commit", endpoint);
    const auto& author = require(commit, "author", endpoint);
    e.timestamp = parse_iso8601(require(author, "date", endpoint).get<std::string>());
    if (author.contains("email") && author["email"].is_string()) e.email = author["email"].get<std::string>();
    if (author.contains("name") && author["name"].is_string()) e.display_name = author["name"].get<std::string>();
    if (item.contains("author") && item["author"].is_object() && item["author"].contains("login")) {
      e.contributor_key = item["author"]["login"].get<std::string>();
    } else if (e.email) {
      e.contributor_key = *e.email;
    } else if (e.display_name) {
      e.contributor_key = *e.display_name;
    } else {
      fail(ErrorKind::parse, "endpoint commits: item has no author identity");
    }
    e.kind = EventKind::commit;
  } else if (endpoint == "pulls") {
    e.event_id = "pr:" + detail::id_text(require(item, "number", endpoint));
    e.contributor_key = detail::login_of(item, endpoint);
    e.timestamp = parse_iso8601(require(item, "created_at", endpoint).get<std::string>());
    e.kind = EventKind::pr_opened;
    e.tags = detail::label_tags(item);
  } else if (endpoint == "pulls/comments") {
    e.event_id = "pr_review:" + detail::id_text(require(item, "id", endpoint));
    e.contributor_key = detail::login_of(item, endpoint);
    e.timestamp = parse_iso8601(require(item, "created_at", endpoint).get<std::string>());
    e.kind = EventKind::pr_review;
  } else if (endpoint == "issues") {
    if (item.contains("pull_request")) return std::nullopt;
    e.event_id = "issue:" + detail::id_text(require(item, "number", endpoint));
    e.contributor_key = detail::login_of(item, endpoint);
    e.timestamp = parse_iso8601(require(item, "created_at", endpoint).get<std::string>());
    e.kind = EventKind::issue_opened;
    e.tags = detail::label_tags(item);
  } else if (endpoint == "issues/comments") {
    e.event_id = "issue_comment:" + detail::id_text(require(item, "id", endpoint));
    e.contributor_key = detail::login_of(item, endpoint);
    e.timestamp = parse_iso8601(require(item, "created_at", endpoint).get<std::string>());
    e.kind = EventKind::issue_comment;
  } else {
    fail(ErrorKind::validation, "unknown endpoint " + endpoint);
  }
  return e;
}

inline const std::vector<std::string>& remote_endpoints() {
  static const std::vector<std::string> endpoints = {"commits", "pulls", "pulls/comments", "issues",
                                                     "issues/comments"};
  return endpoints;
}

// Pages through the GitHub-compatible endpoints collecting events newer than
// `since`. Rate-limit resets are honored; 403/429/5xx and connection errors
// retry with exponential backoff up to options.max_retries.
inline FetchReport fetch_remote_events(const IngestSource& source, Timestamp since, const FetchOptions& options = {}) {
  if (source.kind != SourceKind::remote_api) fail(ErrorKind::validation, "source is not a remote API");
  if (source.location.empty()) fail(ErrorKind::validation, "remote source needs a base URL");
  if (source.repository.find('/') == std::string::npos) {
    fail(ErrorKind::validation, "remote source needs repository as owner/name");
  }
  std::string token;
  if (source.auth_token_env) {
    if (const char* v = std::getenv(source.auth_token_env->c_str())) token = v;
  }

  FetchReport report;
  std::unordered_set<std::string> seen;
  std::string base = source.location;
  while (!base.empty() && base.back() == '/') base.pop_back();

  auto sleep_until_reset = [&](const httplib::Result& res) {
    if (!res->has_header("X-RateLimit-Reset")) return false;
    const Timestamp reset = std::atoll(res->get_header_value("X-RateLimit-Reset").c_str());
    const auto wait = std::chrono::milliseconds(std::max<Timestamp>(0, reset - options.now()) * 1000);
    options.sleep(std::min(wait, options.max_reset_wait));
    return true;
  };

  for (const auto& endpoint : remote_endpoints()) {
    std::string url = base + "/repos/" + source.repository + "/" + endpoint + "?per_page=100";
    if (endpoint == "pulls" || endpoint == "issues") url += "&state=all";
    if (endpoint != "pulls" && since > 0) url += "&since=" + format_iso8601(since);

    std::optional<std::string> next = url;
    while (next) {
      const auto parts = detail::split_url(*next);
      httplib::Client client(parts.origin);
      client.set_connection_timeout(10);
      client.set_read_timeout(30);
      httplib::Headers headers = {{"Accept", "application/vnd.github+json"}};
      if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

      httplib::Result res;
      auto backoff = options.initial_backoff;
      for (int attempt = 0;; ++attempt) {
        ++report.requests;
        res = client.Get(parts.target, headers);
        const int status = res ? res->status : 0;
        if (res && status >= 200 && status < 300) break;
        if (status == 401) fail(ErrorKind::unauthenticated, "endpoint " + endpoint + ": authentication failed (401)");
        if (status == 404) fail(ErrorKind::not_found, "endpoint " + endpoint + ": not found (404)");
        const bool retryable = !res || status == 403 || status == 429 || status >= 500;
        if (!retryable) {
          fail(ErrorKind::transport, "endpoint " + endpoint + ": unexpected HTTP " + std::to_string(status));
        }
        if (attempt >= options.max_retries) {
          if (status == 403) fail(ErrorKind::forbidden, "endpoint " + endpoint + ": access denied (403)");
          fail(ErrorKind::transport, "endpoint " + endpoint + ": giving up after " +
                                         std::to_string(options.max_retries) + " retries" +
                                         (res ? " (HTTP " + std::to_string(status) + ")" : " (no response)"));
        }
        ++report.retries;
        const bool limited = res && (status == 403 || status == 429) &&
                             res->get_header_value("X-RateLimit-Remaining") == "0" && sleep_until_reset(res);
        if (!limited) {
          options.sleep(backoff);
          backoff *= 2;
        }
      }
      ++report.pages[endpoint];

      Json body;
      try {
        body = Json::parse(res->body);
      } catch (const Json::parse_error&) {
        fail(ErrorKind::parse, "endpoint " + endpoint + ": response is not JSON");
      }
      if (!body.is_array()) fail(ErrorKind::parse, "endpoint " + endpoint + ": expected a JSON array");
      for (const auto& item : body) {
        auto e = map_remote_item(endpoint, item, source.repository);
        if (!e || e->timestamp <= since) continue;
        if (seen.insert(e->event_id).second) report.events.push_back(std::move(*e));
      }

      next = res->has_header("Link") ? detail::next_link(res->get_header_value("Link")) : std::nullopt;
      if (next && res->get_header_value("X-RateLimit-Remaining") == "0") sleep_until_reset(res);
    }
  }
  return report;
}

// Appends events whose ids are new; returns how many were added.
inline std::size_t merge_events(std::vector<ContributionEvent>& into, std::span<const ContributionEvent> incoming) {
  std::unordered_set<std::string> ids;
  for (const auto& e : into) ids.insert(e.event_id);
  std::size_t added = 0;
  for (const auto& e : incoming) {
    if (ids.insert(e.event_id).second) {
      into.push_back(e);
      ++added;
    }
  }
  return added;
}

}  // namespace retain
