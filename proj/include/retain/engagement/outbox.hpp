#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retain/io.hpp"
#include "retain/json.hpp"
#include "retain/time.hpp"

namespace retain {

enum class Trigger { newcomer, departure, schedule, manual };

inline std::string_view to_string(Trigger t) {
  switch (t) {
    case Trigger::newcomer: return "newcomer";
    case Trigger::departure: return "departure";
    case Trigger::schedule: return "schedule";
    case Trigger::manual: return "manual";
  }
  return "";
}

inline std::optional<Trigger> parse_trigger(std::string_view text) {
  for (auto t : {Trigger::newcomer, Trigger::departure, Trigger::schedule, Trigger::manual}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

struct OutboxMessage {
  std::string message_id;
  std::string subject;
  std::string body;
  std::string recipient;
  Timestamp created_at = 0;
  Trigger trigger = Trigger::manual;

  bool operator==(const OutboxMessage&) const = default;
};

inline Json to_json(const OutboxMessage& m) {
  Json j;
  j["message_id"] = m.message_id;
  j["subject"] = m.subject;
  j["body"] = m.body;
  j["recipient"] = m.recipient;
  j["created_at"] = m.created_at;
  j["trigger"] = to_string(m.trigger);
  return j;
}

inline OutboxMessage outbox_message_from_json(const Json& j) {
  OutboxMessage m;
  m.message_id = j.at("message_id").get<std::string>();
  m.subject = j.at("subject").get<std::string>();
  m.body = j.at("body").get<std::string>();
  m.recipient = j.at("recipient").get<std::string>();
  m.created_at = j.at("created_at").get<Timestamp>();
  const auto t = parse_trigger(j.at("trigger").get<std::string>());
  if (!t) fail(ErrorKind::parse, "unknown trigger in outbox message " + m.message_id);
  m.trigger = *t;
  return m;
}

// Append-only message log. With a directory, each message is persisted as
// {created_at}-{message_id}.json; without one it lives in memory only.
class Outbox {
 public:
  Outbox() = default;

  explicit Outbox(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::exists(*dir_)) return;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(*dir_)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto m = outbox_message_from_json(Json::parse(read_file(f)));
      ids_.insert(m.message_id);
      messages_.push_back(std::move(m));
    }
  }

  // Optional per-recipient cap on messages per UTC day; unset = no cap.
  void set_daily_cap(std::optional<int> cap) { daily_cap_ = cap; }

  bool contains(const std::string& message_id) const {
    std::lock_guard lock(mutex_);
    return ids_.count(message_id) > 0;
  }

  // False when the id already exists or the recipient hit the daily cap.
  bool append(const OutboxMessage& m) {
    std::lock_guard lock(mutex_);
    if (ids_.count(m.message_id)) return false;
    if (daily_cap_) {
      const auto day = floor_days(m.created_at);
      const auto sent = std::count_if(messages_.begin(), messages_.end(), [&](const OutboxMessage& o) {
        return o.recipient == m.recipient && floor_days(o.created_at) == day;
      });
      if (sent >= *daily_cap_) return false;
    }
    if (dir_) {
      write_file_atomic(*dir_ / (std::to_string(m.created_at) + "-" + m.message_id + ".json"), to_json(m).dump(2));
    }
    ids_.insert(m.message_id);
    messages_.push_back(m);
    return true;
  }

  std::vector<OutboxMessage> messages() const {
    std::lock_guard lock(mutex_);
    return messages_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return messages_.size();
  }

 private:
  std::optional<std::filesystem::path> dir_;
  std::optional<int> daily_cap_;
  mutable std::mutex mutex_;
  std::set<std::string> ids_;
  std::vector<OutboxMessage> messages_;
};

}  // namespace retain
