#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "retain/error.hpp"
#include "retain/hash.hpp"
#include "retain/io.hpp"
#include "retain/json.hpp"
#include "retain/service/crypto.hpp"
#include "retain/time.hpp"

namespace retain {

enum class Role { pending, manager, admin };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::pending: return "pending";
    case Role::manager: return "manager";
    case Role::admin: return "admin";
  }
  return "";
}

inline std::optional<Role> parse_role(std::string_view text) {
  for (auto r : {Role::pending, Role::manager, Role::admin}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

struct Account {
  std::string account_id;
  std::string login;
  std::string password_hash;
  Role role = Role::pending;
  Timestamp created_at = 0;
};

// Public view; never carries the password hash.
inline Json to_json(const Account& a) {
  Json j;
  j["account_id"] = a.account_id;
  j["login"] = a.login;
  j["role"] = to_string(a.role);
  j["created_at"] = a.created_at;
  return j;
}

struct Session {
  std::string token_hash;  // sha256 of the bearer token
  std::string account_id;
  Timestamp expires_at = 0;
};

struct AuditEntry {
  Timestamp at = 0;
  std::string actor;
  std::string action;
  std::string target;
};

inline constexpr std::size_t kMinimumPasswordLength = 10;

using Clock = std::function<Timestamp()>;

inline Timestamp system_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

struct AuthOptions {
  int pbkdf2_iterations = 120000;
  int session_ttl_hours = 24;
};

// Accounts, sessions and the approval audit log under one data directory:
// accounts.json, sessions.json and audit.json.
class AuthStore {
 public:
  AuthStore(std::filesystem::path data_dir, AuthOptions options, Clock clock = system_now)
      : dir_(std::move(data_dir)), options_(options), clock_(std::move(clock)) {
    dummy_hash_ = crypto::hash_password("retain-dummy-password", options_.pbkdf2_iterations);
    load();
  }

  Account signup(const std::string& login, const std::string& password) {
    return create(login, password, Role::pending);
  }

  // Bootstrap path for the first administrator.
  Account create_admin(const std::string& login, const std::string& password) {
    return create(login, password, Role::admin);
  }

  struct LoginResult {
    std::string token;
    Timestamp expires_at = 0;
    Account account;
  };

  // Unknown logins still pay for a hash verification so both failure paths
  // cost the same.
  LoginResult login(const std::string& login, const std::string& password) {
    std::lock_guard lock(mutex_);
    const Account* account = find_login(login);
    const bool ok = crypto::verify_password(password, account ? account->password_hash : dummy_hash_);
    if (!account || !ok) fail(ErrorKind::unauthenticated, "invalid credentials");
    if (account->role == Role::pending) fail(ErrorKind::forbidden, "awaiting approval");
    LoginResult out{crypto::random_token(), clock_() + static_cast<Timestamp>(options_.session_ttl_hours) * 3600,
                    *account};
    sessions_.push_back({crypto::sha256_hex(out.token), account->account_id, out.expires_at});
    save_sessions();
    return out;
  }

  enum class TokenState { valid, unknown, expired };

  struct Lookup {
    TokenState state = TokenState::unknown;
    std::optional<Account> account;
  };

  Lookup authenticate(const std::string& token) const {
    std::lock_guard lock(mutex_);
    const auto hash = crypto::sha256_hex(token);
    for (const auto& s : sessions_) {
      if (s.token_hash != hash) continue;
      if (clock_() >= s.expires_at) return {TokenState::expired, std::nullopt};
      for (const auto& a : accounts_) {
        if (a.account_id == s.account_id) return {TokenState::valid, a};
      }
    }
    return {};
  }

  std::vector<Account> pending() const {
    std::lock_guard lock(mutex_);
    std::vector<Account> out;
    for (const auto& a : accounts_) {
      if (a.role == Role::pending) out.push_back(a);
    }
    return out;
  }

  Account approve(const Account& admin, const std::string& account_id) {
    std::lock_guard lock(mutex_);
    if (admin.role != Role::admin) fail(ErrorKind::forbidden, "only administrators may approve accounts");
    for (auto& a : accounts_) {
      if (a.account_id != account_id) continue;
      if (a.role != Role::pending) fail(ErrorKind::conflict, "account " + account_id + " is already approved");
      a.role = Role::manager;
      audit_.push_back({clock_(), admin.account_id, "approve", account_id});
      save_accounts();
      save_audit();
      return a;
    }
    fail(ErrorKind::not_found, "unknown account " + account_id);
  }

  std::vector<Account> accounts() const {
    std::lock_guard lock(mutex_);
    return accounts_;
  }

  std::vector<AuditEntry> audit_log() const {
    std::lock_guard lock(mutex_);
    return audit_;
  }

 private:
  Account create(const std::string& login, const std::string& password, Role role) {
    std::lock_guard lock(mutex_);
    if (login.empty()) fail(ErrorKind::validation, "login must be non-empty");
    if (password.size() < kMinimumPasswordLength) {
      fail(ErrorKind::validation, "password must be at least " + std::to_string(kMinimumPasswordLength) + " characters");
    }
    if (find_login(login)) fail(ErrorKind::conflict, "login '" + login + "' is taken");
    Account a;
    a.account_id = stable_id("acct-", login);
    a.login = login;
    a.password_hash = crypto::hash_password(password, options_.pbkdf2_iterations);
    a.role = role;
    a.created_at = clock_();
    accounts_.push_back(a);
    save_accounts();
    return a;
  }

  const Account* find_login(const std::string& login) const {
    for (const auto& a : accounts_) {
      if (a.login == login) return &a;
    }
    return nullptr;
  }

  void load() {
    if (auto p = dir_ / "accounts.json"; std::filesystem::exists(p)) {
      for (const auto& j : Json::parse(read_file(p))) {
        Account a;
        a.account_id = j.at("account_id").get<std::string>();
        a.login = j.at("login").get<std::string>();
        a.password_hash = j.at("password_hash").get<std::string>();
        const auto role = parse_role(j.at("role").get<std::string>());
        if (!role) fail(ErrorKind::parse, "accounts.json: unknown role for " + a.login);
        a.role = *role;
        a.created_at = j.at("created_at").get<Timestamp>();
        accounts_.push_back(std::move(a));
      }
    }
    if (auto p = dir_ / "sessions.json"; std::filesystem::exists(p)) {
      for (const auto& j : Json::parse(read_file(p))) {
        sessions_.push_back({j.at("token_hash").get<std::string>(), j.at("account_id").get<std::string>(),
                             j.at("expires_at").get<Timestamp>()});
      }
    }
    if (auto p = dir_ / "audit.json"; std::filesystem::exists(p)) {
      for (const auto& j : Json::parse(read_file(p))) {
        audit_.push_back({j.at("at").get<Timestamp>(), j.at("actor").get<std::string>(),
                          j.at("action").get<std::string>(), j.at("target").get<std::string>()});
      }
    }
  }

  void save_accounts() const {
    Json arr = Json::array();
    for (const auto& a : accounts_) {
      Json j = to_json(a);
      j["password_hash"] = a.password_hash;
      arr.push_back(std::move(j));
    }
    write_file_atomic(dir_ / "accounts.json", arr.dump(2));
  }

  void save_sessions() {
    const Timestamp now = clock_();
    std::erase_if(sessions_, [&](const Session& s) { return s.expires_at <= now; });
    Json arr = Json::array();
    for (const auto& s : sessions_) {
      arr.push_back({{"token_hash", s.token_hash}, {"account_id", s.account_id}, {"expires_at", s.expires_at}});
    }
    write_file_atomic(dir_ / "sessions.json", arr.dump(2));
  }

  void save_audit() const {
    Json arr = Json::array();
    for (const auto& e : audit_) {
      arr.push_back({{"at", e.at}, {"actor", e.actor}, {"action", e.action}, {"target", e.target}});
    }
    write_file_atomic(dir_ / "audit.json", arr.dump(2));
  }

  std::filesystem::path dir_;
  AuthOptions options_;
  Clock clock_;
  std::string dummy_hash_;
  mutable std::mutex mutex_;
  std::vector<Account> accounts_;
  std::vector<Session> sessions_;
  std::vector<AuditEntry> audit_;
};

}  // namespace retain
