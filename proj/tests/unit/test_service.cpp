#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "retain/ingest/synthetic.hpp"
#include "retain/io.hpp"
#include "retain/service/api.hpp"
#include "retain/service/auth.hpp"
#include "retain/service/automation.hpp"
#include "retain/service/crypto.hpp"
#include "retain/service/server.hpp"
#include "retain/service/store.hpp"

using namespace retain;
using retain::testing::TempDir;

namespace {

constexpr int kFastIterations = 1000;
const std::string kProject = "acme";
const std::string kAdminPassword = "admin-password-1";
const std::string kManagerPassword = "manager-password-1";

Config fast_config() {
  Config c;
  c.pbkdf2_iterations = kFastIterations;
  return c;
}

SyntheticCommunity planted_community() {
  SyntheticSpec spec;
  spec.seed = 8;
  spec.n_contributors = 40;
  spec.horizon_days = 365;
  spec.join_spread_days = 200;
  spec.group_shares = {{"secretcorp", 0.5}, {"volunteer", 0.5}};
  spec.group_hazard_per_day = {{"secretcorp", 0.002}, {"volunteer", 0.01}};
  return generate_synthetic_community(spec);
}

struct Env {
  TempDir dir;
  Timestamp now = 1700000000;
  std::optional<ProjectStore> store;
  std::optional<AuthStore> auth;
  std::optional<Api> api;
  std::vector<std::string> log;

  explicit Env(Config cfg = fast_config()) {
    write_file_atomic(dir.path() / "retain.json", Json{{"pbkdf2_iterations", cfg.pbkdf2_iterations},
                                                        {"request_cap_per_token", cfg.request_cap_per_token}}
                                                      .dump());
    open();
  }

  void open() {
    api.reset();
    auth.reset();
    store.reset();
    store.emplace(dir.path());
    auth.emplace(dir.path(), AuthOptions{store->config().pbkdf2_iterations, store->config().session_ttl_hours},
                 [this] { return now; });
    api.emplace(*store, *auth);
    api->set_logger([this](const std::string& line) { log.push_back(line); });
  }

  ApiResponse call(const std::string& method, const std::string& path, std::optional<std::string> token = std::nullopt,
                   Json body = nullptr, std::map<std::string, std::string> query = {}) {
    ApiRequest r;
    r.method = method;
    r.path = path;
    r.query = std::move(query);
    r.body = body.is_null() ? "" : body.dump();
    r.bearer = std::move(token);
    return api->handle(r);
  }

  std::string login(const std::string& who, const std::string& password) {
    const auto res = call("POST", "/api/auth/login", std::nullopt, Json{{"login", who}, {"password", password}});
    EXPECT_EQ(res.status, 200) << res.body.dump();
    return res.body.value("token", std::string());
  }
};

// Sets up admin + approved manager and a project with planted demographics.
struct Populated : Env {
  std::string admin_token, manager_token;
  std::vector<std::string> ids;
  std::string model_id;

  Populated() {
    const auto syn = planted_community();
    store->ingest(kProject, syn.events, syn.observation_end);
    for (const auto& c : store->snapshot(kProject)->community.contributors) ids.push_back(c.contributor_id);
    for (std::size_t i = 0; i < ids.size(); i += 3) {
      store->record_demographics(kProject, ids[i],
                                 Demographics{std::string("secret-gender"), std::string("secret-region"), 1.0,
                                              DemographicSource::self_reported});
    }
    auth->create_admin("root", kAdminPassword);
    admin_token = login("root", kAdminPassword);
    const auto signup = call("POST", "/api/auth/signup", std::nullopt, Json{{"login", "mia"}, {"password", kManagerPassword}});
    EXPECT_EQ(signup.status, 201);
    EXPECT_EQ(call("POST", "/api/admin/approve", admin_token, Json{{"account_id", signup.body["account_id"]}}).status, 200);
    manager_token = login("mia", kManagerPassword);
    const auto fit = call("POST", "/api/projects/" + kProject + "/models", manager_token,
                          Json{{"kind", "cox"}, {"features", {"n_commit", "active_weeks"}}, {"seed", 3}});
    EXPECT_EQ(fit.status, 201) << fit.body.dump();
    model_id = fit.body.value("model_id", std::string());
  }
};

bool has_key_anywhere(const Json& j, const std::set<std::string>& keys) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (keys.count(k) || has_key_anywhere(v, keys)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (has_key_anywhere(v, keys)) return true;
    }
  }
  return false;
}

}  // namespace

// ---- crypto ------------------------------------------------------------------

TEST(Crypto, Sha256KnownVector) {
  EXPECT_EQ(crypto::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Crypto, PasswordHashing) {
  const auto a = crypto::hash_password("correct horse", kFastIterations);
  const auto b = crypto::hash_password("correct horse", kFastIterations);
  EXPECT_NE(a, b);  // fresh salt
  EXPECT_EQ(a.rfind("pbkdf2-sha256$1000$", 0), 0u);
  EXPECT_TRUE(crypto::verify_password("correct horse", a));
  EXPECT_FALSE(crypto::verify_password("correct horsf", a));
  EXPECT_FALSE(crypto::verify_password("x", "garbage"));
  EXPECT_EQ(crypto::random_token().size(), 64u);
  EXPECT_NE(crypto::random_token(), crypto::random_token());
}

// ---- auth ---------------------------------------------------------------------

TEST(Auth, SignupApprovalLoginFlow) {
  Env env;
  EXPECT_EQ(env.call("POST", "/api/auth/signup", std::nullopt, Json{{"login", "a"}, {"password", "short"}}).status, 400);
  const auto s = env.call("POST", "/api/auth/signup", std::nullopt, Json{{"login", "ana"}, {"password", "long-enough-pw"}});
  ASSERT_EQ(s.status, 201);
  EXPECT_EQ(s.body["role"], "pending");
  EXPECT_EQ(env.call("POST", "/api/auth/signup", std::nullopt, Json{{"login", "ana"}, {"password", "long-enough-pw"}}).status, 409);

  const auto pending_login = env.call("POST", "/api/auth/login", std::nullopt, Json{{"login", "ana"}, {"password", "long-enough-pw"}});
  EXPECT_EQ(pending_login.status, 403);
  EXPECT_FALSE(pending_login.body.contains("token"));
  EXPECT_EQ(env.call("POST", "/api/auth/login", std::nullopt, Json{{"login", "ana"}, {"password", "wrong-password"}}).status, 401);
  EXPECT_EQ(env.call("POST", "/api/auth/login", std::nullopt, Json{{"login", "nobody"}, {"password", "long-enough-pw"}}).status, 401);

  env.auth->create_admin("root", kAdminPassword);
  const auto admin = env.login("root", kAdminPassword);
  const auto queue = env.call("GET", "/api/admin/pending", admin);
  ASSERT_EQ(queue.status, 200);
  ASSERT_EQ(queue.body.size(), 1u);
  const Json approve{{"account_id", s.body["account_id"]}};
  EXPECT_EQ(env.call("POST", "/api/admin/approve", admin, approve).status, 200);
  EXPECT_EQ(env.call("POST", "/api/admin/approve", admin, approve).status, 409);  // replay
  EXPECT_EQ(env.call("POST", "/api/admin/approve", admin, Json{{"account_id", "acct-missing"}}).status, 404);
  ASSERT_EQ(env.auth->audit_log().size(), 1u);
  EXPECT_EQ(env.auth->audit_log()[0].action, "approve");

  const auto manager = env.login("ana", "long-enough-pw");
  EXPECT_EQ(env.call("GET", "/api/admin/pending", manager).status, 403);
  EXPECT_EQ(env.call("POST", "/api/admin/approve", manager, approve).status, 403);
  EXPECT_EQ(env.call("GET", "/api/admin/pending").status, 401);
}

TEST(Auth, ExpiredSessionIsDistinguishable) {
  Env env;
  env.auth->create_admin("root", kAdminPassword);
  const auto token = env.login("root", kAdminPassword);
  EXPECT_EQ(env.call("GET", "/api/admin/pending", token).status, 200);
  env.now += 24 * 3600;
  const auto res = env.call("GET", "/api/admin/pending", token);
  EXPECT_EQ(res.status, 401);
  EXPECT_EQ(res.body["code"], "session_expired");
  const auto bogus = env.call("GET", "/api/admin/pending", std::string("not-a-token"));
  EXPECT_EQ(bogus.status, 401);
  EXPECT_EQ(bogus.body["code"], "unauthenticated");
  // expired tokens also fail on shared routes rather than degrading to anonymous
  EXPECT_EQ(env.call("GET", "/api/projects", token).status, 401);
}

TEST(Auth, PersistenceStoresOnlyHashes) {
  Env env;
  env.auth->create_admin("root", kAdminPassword);
  const auto token = env.login("root", kAdminPassword);
  const auto sessions = read_file(env.dir.path() / "sessions.json");
  EXPECT_EQ(sessions.find(token), std::string::npos);
  EXPECT_NE(sessions.find(crypto::sha256_hex(token)), std::string::npos);
  const auto accounts = read_file(env.dir.path() / "accounts.json");
  EXPECT_EQ(accounts.find(kAdminPassword), std::string::npos);
  env.open();
  EXPECT_EQ(env.call("GET", "/api/admin/pending", token).status, 200);
}

TEST(Access, DecisionMatrix) {
  Account pending{"p", "p", "", Role::pending, 0}, manager{"m", "m", "", Role::manager, 0}, admin{"a", "a", "", Role::admin, 0};
  const std::vector<std::pair<std::string, Caller>> callers = {
      {"anonymous", Caller{}}, {"pending", Caller{pending}}, {"manager", Caller{manager}}, {"admin", Caller{admin}}};
  // expected allowed / include_demographics / status per resource class
  const std::map<std::string, std::vector<std::tuple<bool, bool, int>>> expected = {
      {"anonymous", {{true, false, 200}, {true, false, 200}, {false, false, 401}, {false, false, 401}, {false, false, 401}}},
      {"pending", {{true, false, 200}, {true, false, 200}, {false, false, 403}, {false, false, 403}, {false, false, 403}}},
      {"manager", {{true, false, 200}, {true, true, 200}, {true, true, 200}, {true, true, 200}, {false, false, 403}}},
      {"admin", {{true, false, 200}, {true, true, 200}, {true, true, 200}, {true, true, 200}, {true, true, 200}}}};
  const std::vector<ResourceClass> classes = {ResourceClass::open, ResourceClass::shared, ResourceClass::demographic,
                                              ResourceClass::management, ResourceClass::administration};
  for (const auto& [name, caller] : callers) {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const auto d = enforce_access(caller, classes[k]);
      const auto [allowed, demo, status] = expected.at(name)[k];
      EXPECT_EQ(d.allowed, allowed) << name << " " << k;
      EXPECT_EQ(d.include_demographics, demo) << name << " " << k;
      EXPECT_EQ(d.status, status) << name << " " << k;
    }
  }
}

// ---- role x route fuzzing ---------------------------------------------------------

TEST(Access, FuzzFindsNoDemographicLeaks) {
  Populated env;
  const std::string p = "/api/projects/" + kProject;
  struct Route {
    std::string method, path;
    std::map<std::string, std::string> query;
    Json body;
  };
  std::vector<Route> routes = {
      {"GET", "/api/projects", {}, nullptr},
      {"GET", p + "/overview", {}, nullptr},
      {"GET", p + "/overview", {{"start", "2020-03-01T00:00:00Z"}, {"end", "2021-01-01T00:00:00Z"}}, nullptr},
      {"GET", p + "/activity", {{"bucket_days", "30"}}, nullptr},
      {"GET", p + "/tags", {}, nullptr},
      {"GET", p + "/tags/docs", {}, nullptr},
      {"GET", p + "/newcomers", {}, nullptr},
      {"GET", p + "/inactive", {}, nullptr},
      {"GET", p + "/survival", {}, nullptr},
      {"GET", p + "/outbox", {}, nullptr},
      {"GET", p + "/schedules", {}, nullptr},
      {"GET", "/api/models/" + env.model_id, {}, nullptr},
      {"GET", "/api/models/" + env.model_id + "/risk", {}, nullptr},
      {"GET", "/api/admin/pending", {}, nullptr},
      {"POST", p + "/models", {}, Json{{"kind", "cox"}, {"features", {"n_commit"}}}},
      {"POST", p + "/schedules", {}, Json{{"cadence", "weekly"}, {"recipients", {"x@y.example"}}}},
      {"POST", "/api/admin/approve", {}, Json{{"account_id", "acct-x"}}},
  };
  for (const char* lens : {"affiliation", "gender", "region", "newcomer_status"}) {
    routes.push_back({"GET", p + "/distribution", {{"lens", lens}}, nullptr});
    routes.push_back({"GET", p + "/survival", {{"group_by", lens}}, nullptr});
  }
  for (const auto& id : env.ids) {
    routes.push_back({"GET", p + "/contributors/" + id, {}, nullptr});
    routes.push_back({"POST", p + "/contributors/" + id + "/demographics", {},
                      Json{{"gender", "secret-gender"}, {"source", "corrected"}}});
  }

  const std::set<std::string> demographic_keys = {"demographics", "gender", "region", "affiliation", "emails"};
  std::mt19937 rng(2024);
  const std::vector<std::optional<std::string>> low_callers = {std::nullopt, std::string("forged-token"),
                                                               std::string(64, 'a')};
  const auto schedules_before = env.store->schedules(kProject).size();
  int checked = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const auto& route = routes[rng() % routes.size()];
    const auto& token = low_callers[rng() % low_callers.size()];
    const auto res = env.call(route.method, route.path, token, route.body, route.query);
    const auto text = res.body.dump();
    EXPECT_EQ(text.find("secret"), std::string::npos) << route.path << " -> " << text.substr(0, 200);
    EXPECT_FALSE(has_key_anywhere(res.body, demographic_keys)) << route.path;
    if (token) {
      EXPECT_EQ(res.status, 401) << route.path;  // bad tokens never degrade to anonymous
    }
    ++checked;
  }
  EXPECT_EQ(checked, 1500);
  EXPECT_EQ(env.store->schedules(kProject).size(), schedules_before);

  // Every route once anonymously, with the expected status class.
  for (const auto& route : routes) {
    const auto res = env.call(route.method, route.path, std::nullopt, route.body, route.query);
    const bool gated = route.method == "POST" || route.path.find("/distribution") != std::string::npos ||
                       route.path.find("/outbox") != std::string::npos ||
                       route.path.find("/schedules") != std::string::npos ||
                       route.path.find("/admin/") != std::string::npos ||
                       (route.path.find("/survival") != std::string::npos && route.query.count("group_by") &&
                        route.query.at("group_by") != "newcomer_status");
    EXPECT_EQ(res.status, gated ? 401 : 200) << route.method << " " << route.path << " " << res.body.dump().substr(0, 200);
  }

  // Positive control: managers do see the planted values.
  const auto overview = env.call("GET", p + "/overview", env.manager_token);
  EXPECT_NE(overview.body.dump().find("secret-region"), std::string::npos);
  EXPECT_NE(overview.body.dump().find("secretcorp.example"), std::string::npos);
  const auto person = env.call("GET", p + "/contributors/" + env.ids[0], env.manager_token);
  EXPECT_TRUE(person.body.contains("demographics"));
  EXPECT_EQ(env.call("GET", p + "/distribution", env.manager_token, nullptr, {{"lens", "gender"}}).status, 200);
}

TEST(Access, ResponsesAndLogsNeverCarryPasswordMaterial) {
  Populated env;
  const std::vector<std::string> paths = {"/api/admin/pending", "/api/projects", "/api/projects/acme/overview"};
  std::string everything;
  for (const auto& path : paths) everything += env.call("GET", path, env.admin_token).body.dump();
  everything += env.call("POST", "/api/auth/signup", std::nullopt, Json{{"login", "zed"}, {"password", "zed-password-9"}}).body.dump();
  everything += env.call("POST", "/api/auth/login", std::nullopt, Json{{"login", "root"}, {"password", kAdminPassword}}).body.dump();
  for (const auto& line : env.log) everything += line;
  EXPECT_EQ(everything.find("pbkdf2"), std::string::npos);
  EXPECT_EQ(everything.find(kAdminPassword), std::string::npos);
  EXPECT_EQ(everything.find("zed-password-9"), std::string::npos);
  for (const auto& a : env.auth->accounts()) {
    EXPECT_EQ(everything.find(a.password_hash), std::string::npos);
    EXPECT_FALSE(a.password_hash.empty());
  }
}

// ---- persistence --------------------------------------------------------------------

TEST(Store, ReloadReproducesFiftyResponses) {
  Populated env;
  const std::string p = "/api/projects/" + kProject;
  EXPECT_EQ(env.call("POST", p + "/schedules", env.manager_token,
                     Json{{"cadence", "daily"}, {"at_utc", "08:15"}, {"recipients", {"lead@acme.example"}}})
                .status,
            201);
  EXPECT_EQ(env.call("POST", p + "/contributors/" + env.ids[1] + "/demographics", env.manager_token,
                     Json{{"region", "europe"}, {"source", "corrected"}})
                .status,
            200);

  std::vector<std::tuple<std::string, std::map<std::string, std::string>, std::optional<std::string>>> script;
  const std::vector<std::string> fixed = {"/overview", "/activity", "/tags", "/tags/docs", "/newcomers", "/inactive",
                                          "/survival", "/schedules", "/outbox"};
  for (const auto& f : fixed) {
    script.push_back({p + f, {}, env.manager_token});
    script.push_back({p + f, {}, std::nullopt});
  }
  for (const char* lens : {"affiliation", "gender", "region", "newcomer_status"}) {
    script.push_back({p + "/distribution", {{"lens", lens}}, env.manager_token});
    script.push_back({p + "/survival", {{"group_by", lens}}, env.manager_token});
  }
  script.push_back({"/api/models/" + env.model_id, {}, env.manager_token});
  script.push_back({"/api/models/" + env.model_id + "/risk", {}, env.manager_token});
  script.push_back({"/api/projects", {}, std::nullopt});
  script.push_back({"/api/admin/pending", {}, env.admin_token});
  for (std::size_t i = 0; script.size() < 50; ++i) {
    script.push_back({p + "/contributors/" + env.ids[i % env.ids.size()], {}, i % 2 ? env.manager_token : std::optional<std::string>()});
  }
  ASSERT_EQ(script.size(), 50u);

  auto run = [&] {
    std::vector<std::string> out;
    for (const auto& [path, query, token] : script) {
      const auto res = env.call("GET", path, token, nullptr, query);
      out.push_back(std::to_string(res.status) + " " + res.body.dump());
    }
    return out;
  };
  const auto before = run();
  for (std::size_t i = 0; i < before.size(); ++i) {
    const bool anonymous = !std::get<2>(script[i]).has_value();
    const bool ok = before[i].rfind("200 ", 0) == 0 || (anonymous && before[i].rfind("401 ", 0) == 0);
    EXPECT_TRUE(ok) << before[i].substr(0, 200);
  }
  env.open();
  const auto after = run();
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i], after[i]) << std::get<0>(script[i]);
}

TEST(Store, ProjectNamesAndUnknownProjects) {
  Env env;
  EXPECT_THROW(validate_project_name("../etc"), Error);
  EXPECT_THROW(validate_project_name(".hidden"), Error);
  EXPECT_THROW(validate_project_name(""), Error);
  EXPECT_NO_THROW(validate_project_name("my-proj_1.0"));
  EXPECT_EQ(env.call("GET", "/api/projects/nope/overview").status, 404);
  EXPECT_EQ(env.call("GET", "/api/projects/..%2F/overview").status, 400);
  EXPECT_EQ(env.call("GET", "/api/nothing/here").status, 404);
}

TEST(Store, InsufficientFitIsBadRequest) {
  Env env;
  env.auth->create_admin("root", kAdminPassword);
  const auto token = env.login("root", kAdminPassword);
  env.store->ingest("tiny", std::vector<ContributionEvent>{retain::testing::make_event("e", "solo", 1600000000)});
  const auto res = env.call("POST", "/api/projects/tiny/models", token, Json{{"kind", "cox"}});
  EXPECT_EQ(res.status, 400);
  EXPECT_NE(res.body.dump().find("insufficient records"), std::string::npos);
  EXPECT_EQ(env.call("POST", "/api/projects/tiny/models", token, Json{{"kind", "forest"}}).status, 400);
  EXPECT_EQ(env.call("POST", "/api/projects/tiny/models", token, std::string("{not json")).status, 400);
}

TEST(Store, RequestCapPerToken) {
  Config cfg = fast_config();
  cfg.request_cap_per_token = 3;
  Env env(cfg);
  env.auth->create_admin("root", kAdminPassword);
  const auto token = env.login("root", kAdminPassword);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(env.call("GET", "/api/projects", token).status, 200);
  const auto res = env.call("GET", "/api/projects", token);
  EXPECT_EQ(res.status, 429);
  EXPECT_EQ(res.body["code"], "rate_limited");
  EXPECT_EQ(env.call("GET", "/api/projects").status, 200);  // anonymous requests are not token-counted
}

// ---- automation --------------------------------------------------------------------

TEST(Automation, TickIsIdempotent) {
  Populated env;
  EXPECT_EQ(env.call("POST", "/api/projects/" + kProject + "/schedules", env.manager_token,
                     Json{{"cadence", "weekly"}, {"recipients", {"lead@acme.example"}}})
                .status,
            201);
  const Timestamp now = 1700000000;
  const auto first = run_automation(*env.store, kProject, now);
  EXPECT_EQ(first.scheduled.size(), 1u);
  for (const auto& m : first.lifecycle) EXPECT_NE(m.trigger, Trigger::departure);
  const auto size = env.store->outbox(kProject).size();
  const auto second = run_automation(*env.store, kProject, now);
  EXPECT_TRUE(second.scheduled.empty());
  EXPECT_TRUE(second.lifecycle.empty());
  EXPECT_EQ(env.store->outbox(kProject).size(), size);
  EXPECT_NE(first.scheduled[0].body.find("Community health report"), std::string::npos);
}

// ---- HTTP ----------------------------------------------------------------------------

TEST(Http, ServesTheApiOverLoopback) {
  Populated env;
  HttpServer server(*env.api);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  const auto login = client.Post("/api/auth/login", Json{{"login", "mia"}, {"password", kManagerPassword}}.dump(),
                                 "application/json");
  ASSERT_TRUE(login);
  EXPECT_EQ(login->status, 200);
  const auto token = Json::parse(login->body)["token"].get<std::string>();

  const auto over = client.Get("/api/projects/acme/overview?start=2020-03-01T00:00:00Z",
                               httplib::Headers{{"Authorization", "Bearer " + token}});
  ASSERT_TRUE(over);
  EXPECT_EQ(over->status, 200);
  const auto direct = env.call("GET", "/api/projects/acme/overview", token, nullptr, {{"start", "2020-03-01T00:00:00Z"}});
  EXPECT_EQ(Json::parse(over->body), direct.body);

  const auto anon = client.Get("/api/projects/acme/outbox");
  ASSERT_TRUE(anon);
  EXPECT_EQ(anon->status, 401);
  server.stop();
  t.join();
}

// ---- timing ----------------------------------------------------------------------------

TEST(Timing, UnknownLoginCostsAboutTheSameAsWrongPassword) {
  Env env;
  env.auth->create_admin("root", kAdminPassword);
  auto time_login = [&](const std::string& who) {
    const auto start = std::chrono::steady_clock::now();
    try {
      env.auth->login(who, "wrong-password-x");
    } catch (const Error&) {
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  std::vector<double> unknown, wrong;
  for (int i = 0; i < 1000; ++i) {
    unknown.push_back(time_login("ghost"));
    wrong.push_back(time_login("root"));
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  const double ratio = median(unknown) / median(wrong);
  EXPECT_GT(ratio, 0.67) << ratio;
  EXPECT_LT(ratio, 1.5) << ratio;
}
