#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "retain/service/auth.hpp"
#include "retain/service/store.hpp"
#include "retain/service/views.hpp"

namespace retain {

struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::optional<std::string> bearer;
};

struct ApiResponse {
  int status = 200;
  Json body;
};

enum class ResourceClass {
  open,            // signup and login
  shared,          // metrics readable by anyone; demographic fields omitted below manager
  demographic,     // endpoints whose whole payload is demographic
  management,      // mutations and recipient data
  administration,  // approval queue
};

struct Caller {
  std::optional<Account> account;
  bool expired = false;
  bool invalid_token = false;
};

struct AccessDecision {
  bool allowed = false;
  bool include_demographics = false;
  int status = 200;
  std::string code;
  std::string message;
};

inline AccessDecision enforce_access(const Caller& caller, ResourceClass resource) {
  if (resource == ResourceClass::open) return {true, false, 200, "", ""};
  if (caller.expired) return {false, false, 401, "session_expired", "session expired; log in again"};
  if (caller.invalid_token) return {false, false, 401, "unauthenticated", "invalid session token"};
  const std::optional<Role> role = caller.account ? std::optional<Role>(caller.account->role) : std::nullopt;
  const bool privileged = role && (*role == Role::manager || *role == Role::admin);
  switch (resource) {
    case ResourceClass::open: break;
    case ResourceClass::shared: return {true, privileged, 200, "", ""};
    case ResourceClass::demographic:
    case ResourceClass::management:
      if (!role) return {false, false, 401, "unauthenticated", "login required"};
      if (!privileged) return {false, false, 403, "forbidden", "manager role required"};
      return {true, true, 200, "", ""};
    case ResourceClass::administration:
      if (!role) return {false, false, 401, "unauthenticated", "login required"};
      if (*role != Role::admin) return {false, false, 403, "forbidden", "administrator role required"};
      return {true, true, 200, "", ""};
  }
  return {};
}

inline int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::parse:
    case ErrorKind::insufficient: return 400;
    case ErrorKind::unauthenticated: return 401;
    case ErrorKind::forbidden: return 403;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::transport: return 502;
  }
  return 500;
}

inline std::string error_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::parse: return "validation";
    case ErrorKind::insufficient: return "insufficient";
    case ErrorKind::unauthenticated: return "unauthenticated";
    case ErrorKind::forbidden: return "forbidden";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::transport: return "transport";
  }
  return "internal";
}

inline ApiResponse error_response(int status, const std::string& code, const std::string& message) {
  return {status, Json{{"code", code}, {"message", message}}};
}

namespace detail {

inline std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const auto j = path.find('/', i);
    const auto end = j == std::string::npos ? path.size() : j;
    if (end > i) out.push_back(path.substr(i, end - i));
    i = end;
  }
  return out;
}

// Integer seconds or ISO 8601.
inline std::optional<Timestamp> time_param(const std::map<std::string, std::string>& q, const std::string& name) {
  auto it = q.find(name);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  const auto& v = it->second;
  if (std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) return std::stoll(v);
  try {
    return parse_iso8601(v);
  } catch (const Error&) {
    fail(ErrorKind::validation, "invalid timestamp for '" + name + "'");
  }
}

inline int int_param(const std::map<std::string, std::string>& q, const std::string& name, int fallback) {
  auto it = q.find(name);
  if (it == q.end() || it->second.empty()) return fallback;
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(name);
    return v;
  } catch (const std::logic_error&) {
    fail(ErrorKind::validation, "invalid integer for '" + name + "'");
  }
}

inline Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) fail(ErrorKind::validation, "request body must be a JSON object");
    return j;
  } catch (const Json::parse_error&) {
    fail(ErrorKind::validation, "request body is not valid JSON");
  }
}

template <typename T>
T body_field(const Json& body, const std::string& key) {
  if (!body.contains(key)) fail(ErrorKind::validation, "missing field '" + key + "'");
  try {
    return body.at(key).get<T>();
  } catch (const Json::exception&) {
    fail(ErrorKind::validation, "field '" + key + "' has the wrong type");
  }
}

template <typename T>
T body_field(const Json& body, const std::string& key, const T& fallback) {
  return body.contains(key) ? body_field<T>(body, key) : fallback;
}

}  // namespace detail

// JSON API over a ProjectStore. Transport-independent: the HTTP server and
// the tests both go through handle().
class Api {
 public:
  Api(ProjectStore& store, AuthStore& auth) : store_(store), auth_(auth) {}

  void set_logger(std::function<void(const std::string&)> log) { log_ = std::move(log); }

  ApiResponse handle(const ApiRequest& req) {
    ApiResponse res;
    try {
      res = dispatch(req);
    } catch (const Error& e) {
      res = error_response(http_status(e.kind()), error_code(e.kind()), e.what());
    } catch (const Json::exception& e) {
      res = error_response(400, "validation", e.what());
    } catch (const std::exception& e) {
      res = error_response(500, "internal", e.what());
    }
    if (log_) log_(req.method + " " + req.path + " " + std::to_string(res.status));
    return res;
  }

 private:
  using Segments = std::vector<std::string>;

  Caller identify(const ApiRequest& req) {
    Caller caller;
    if (!req.bearer) return caller;
    const auto lookup = auth_.authenticate(*req.bearer);
    if (lookup.state == AuthStore::TokenState::expired) caller.expired = true;
    if (lookup.state == AuthStore::TokenState::unknown) caller.invalid_token = true;
    caller.account = lookup.account;
    return caller;
  }

  bool over_cap(const ApiRequest& req) {
    if (!req.bearer) return false;
    std::lock_guard lock(counter_mutex_);
    return ++requests_[crypto::sha256_hex(*req.bearer)] > store_.config().request_cap_per_token;
  }

  ApiResponse dispatch(const ApiRequest& req) {
    const auto seg = detail::split_path(req.path);
    if (seg.size() < 2 || seg[0] != "api") return error_response(404, "not_found", "no route for " + req.path);
    if (over_cap(req)) return error_response(429, "rate_limited", "request cap reached for this session");
    const Caller caller = identify(req);
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";

    auto gate = [&](ResourceClass rc) -> std::optional<AccessDecision> {
      auto d = enforce_access(caller, rc);
      if (!d.allowed) throw Denied{d};
      return d;
    };

    try {
      if (seg[1] == "auth" && seg.size() == 3 && post) {
        const Json body = detail::parse_body(req.body);
        std::unique_lock lock(mutex_);
        if (seg[2] == "signup") {
          const auto a = auth_.signup(detail::body_field<std::string>(body, "login"),
                                      detail::body_field<std::string>(body, "password"));
          return {201, to_json(a)};
        }
        if (seg[2] == "login") {
          const auto r = auth_.login(detail::body_field<std::string>(body, "login"),
                                     detail::body_field<std::string>(body, "password"));
          return {200, Json{{"token", r.token}, {"expires_at", r.expires_at}, {"account", to_json(r.account)}}};
        }
      }
      if (seg[1] == "admin" && seg.size() == 3) {
        if (seg[2] == "pending" && get) {
          gate(ResourceClass::administration);
          Json arr = Json::array();
          for (const auto& a : auth_.pending()) arr.push_back(to_json(a));
          return {200, arr};
        }
        if (seg[2] == "approve" && post) {
          gate(ResourceClass::administration);
          const Json body = detail::parse_body(req.body);
          std::unique_lock lock(mutex_);
          return {200, to_json(auth_.approve(*caller.account, detail::body_field<std::string>(body, "account_id")))};
        }
      }
      if (seg[1] == "models" && (seg.size() == 3 || seg.size() == 4) && get) {
        gate(ResourceClass::shared);
        std::shared_lock lock(mutex_);
        const auto stored = store_.load_model(seg[2]);
        if (seg.size() == 3) {
          Json j = model_summary_json(stored.model);
          j["project"] = stored.project;
          return {200, j};
        }
        if (seg[3] == "risk") {
          const auto snap = store_.snapshot(stored.project);
          const auto scores = risk_for(*snap, stored.model);
          return {200, Json{{"model_id", stored.model.model_id},
                            {"project", stored.project},
                            {"scores", to_json(std::span<const RiskScore>(scores))}}};
        }
      }
      if (seg[1] == "projects" && seg.size() == 2 && get) {
        gate(ResourceClass::shared);
        return {200, Json(store_.projects())};
      }
      if (seg[1] == "projects" && seg.size() >= 4) return project_route(req, seg, gate);
    } catch (const Denied& d) {
      return error_response(d.decision.status, d.decision.code, d.decision.message);
    }
    return error_response(404, "not_found", "no route for " + req.method + " " + req.path);
  }

  struct Denied {
    AccessDecision decision;
  };

  template <typename Gate>
  ApiResponse project_route(const ApiRequest& req, const Segments& seg, Gate&& gate) {
    const std::string& project = seg[2];
    const std::string& what = seg[3];
    const auto& q = req.query;
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    const int window = store_.config().feature_window_days;

    if (get && seg.size() == 4) {
      if (what == "distribution") {
        gate(ResourceClass::demographic);
        auto it = q.find("lens");
        if (it == q.end()) fail(ErrorKind::validation, "missing query parameter 'lens'");
        const auto lens = parse_lens(it->second);
        if (!lens) fail(ErrorKind::validation, "unknown lens '" + it->second + "'");
        std::shared_lock lock(mutex_);
        return {200, distribution_view(*store_.snapshot(project), *lens)};
      }
      if (what == "survival") {
        std::optional<Lens> group_by;
        if (auto it = q.find("group_by"); it != q.end() && !it->second.empty() && it->second != "none") {
          group_by = parse_lens(it->second);
          if (!group_by) fail(ErrorKind::validation, "unknown lens '" + it->second + "'");
        }
        gate(group_by && is_demographic(*group_by) ? ResourceClass::demographic : ResourceClass::shared);
        std::shared_lock lock(mutex_);
        return {200, survival_view(*store_.snapshot(project), group_by, detail::int_param(q, "window_days", window))};
      }
      if (what == "outbox") {
        gate(ResourceClass::management);
        std::shared_lock lock(mutex_);
        store_.snapshot(project);
        Json arr = Json::array();
        for (const auto& m : store_.outbox(project).messages()) arr.push_back(to_json(m));
        return {200, arr};
      }
      if (what == "schedules") {
        gate(ResourceClass::management);
        std::shared_lock lock(mutex_);
        store_.snapshot(project);
        Json arr = Json::array();
        for (const auto& s : store_.schedules(project)) arr.push_back(to_json(s));
        return {200, arr};
      }
      const auto decision = *gate(ResourceClass::shared);
      std::shared_lock lock(mutex_);
      const auto snap = store_.snapshot(project);
      if (what == "overview") {
        return {200, overview_view(*snap, detail::time_param(q, "start"), detail::time_param(q, "end"),
                                   decision.include_demographics)};
      }
      if (what == "activity") {
        return {200, activity_view(*snap, detail::int_param(q, "bucket_days", 7), detail::time_param(q, "start"),
                                   detail::time_param(q, "end"))};
      }
      if (what == "tags") return {200, tags_view(*snap)};
      if (what == "newcomers") return {200, newcomers_view(*snap)};
      if (what == "inactive") return {200, inactive_view(*snap)};
    }
    if (get && seg.size() == 5) {
      const auto decision = *gate(ResourceClass::shared);
      std::shared_lock lock(mutex_);
      const auto snap = store_.snapshot(project);
      if (what == "contributors") return {200, contributor_view(*snap, seg[4], decision.include_demographics)};
      if (what == "tags") return {200, tag_view(*snap, seg[4])};
    }
    if (post && seg.size() == 4 && what == "models") {
      gate(ResourceClass::management);
      const Json body = detail::parse_body(req.body);
      FitRequest fit;
      const auto kind_text = detail::body_field<std::string>(body, "kind");
      const auto kind = parse_model_kind(kind_text);
      if (!kind) fail(ErrorKind::validation, "unknown model kind '" + kind_text + "'");
      fit.kind = *kind;
      fit.features = detail::body_field<std::vector<std::string>>(body, "features", {});
      fit.feature_window_days = detail::body_field<int>(body, "feature_window_days", window);
      fit.seed = detail::body_field<std::uint64_t>(body, "seed", store_.config().default_seed);
      fit.train_fraction = detail::body_field<double>(body, "train_fraction", fit.train_fraction);
      fit.trees = detail::body_field<int>(body, "trees", fit.trees);
      std::unique_lock lock(mutex_);
      const auto model = fit_for(*store_.snapshot(project), fit);
      store_.save_model(project, model);
      Json j = model_summary_json(model);
      j["project"] = project;
      return {201, j};
    }
    if (post && seg.size() == 4 && what == "schedules") {
      gate(ResourceClass::management);
      Json body = detail::parse_body(req.body);
      body.erase("schedule_id");
      body.erase("last_run");
      Schedule s = schedule_from_json(body);
      if (s.recipients.empty()) fail(ErrorKind::validation, "a schedule needs at least one recipient");
      std::unique_lock lock(mutex_);
      store_.snapshot(project);
      auto all = store_.schedules(project);
      s.schedule_id = stable_id("sch-", project + "|" + std::to_string(all.size()) + "|" + body.dump());
      all.push_back(s);
      store_.save_schedules(project, all);
      return {201, to_json(s)};
    }
    if (post && seg.size() == 6 && what == "contributors" && seg[5] == "demographics") {
      gate(ResourceClass::management);
      const Json body = detail::parse_body(req.body);
      Demographics d;
      if (body.contains("gender")) d.gender = detail::body_field<std::string>(body, "gender");
      if (body.contains("region")) d.region = detail::body_field<std::string>(body, "region");
      if (!d.gender && !d.region) fail(ErrorKind::validation, "payload needs 'gender' or 'region'");
      const auto source_text = detail::body_field<std::string>(body, "source", "self_reported");
      const auto source = parse_demographic_source(source_text);
      if (!source || *source == DemographicSource::inferred) {
        fail(ErrorKind::validation, "source must be self_reported or corrected");
      }
      d.source = *source;
      std::unique_lock lock(mutex_);
      return {200, to_json(store_.record_demographics(project, seg[4], d), true)};
    }
    return error_response(404, "not_found", "no route for " + req.method + " " + req.path);
  }

  ProjectStore& store_;
  AuthStore& auth_;
  std::function<void(const std::string&)> log_;
  std::shared_mutex mutex_;
  std::mutex counter_mutex_;
  std::map<std::string, int> requests_;
};

}  // namespace retain
