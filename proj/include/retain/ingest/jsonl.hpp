#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "retain/core/types.hpp"

namespace retain {

namespace detail {

inline std::optional<std::string> optional_string(const Json& obj, const char* field, std::size_t line) {
  if (!obj.contains(field)) {
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": missing field '" + field + "'");
  }
  const auto& v = obj[field];
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) {
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": field '" + field + "' must be string or null");
  }
  return v.get<std::string>();
}

inline std::string required_string(const Json& obj, const char* field, std::size_t line) {
  auto v = optional_string(obj, field, line);
  if (!v) fail(ErrorKind::parse, "line " + std::to_string(line) + ": field '" + field + "' must be a string");
  return *v;
}

}  // namespace detail

inline ContributionEvent parse_event_line(const std::string& text, std::size_t line) {
  Json obj;
  try {
    obj = Json::parse(text);
  } catch (const Json::parse_error& ex) {
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": malformed JSON (" + ex.what() + ")");
  }
  if (!obj.is_object()) fail(ErrorKind::parse, "line " + std::to_string(line) + ": expected a JSON object");

  ContributionEvent e;
  e.event_id = detail::required_string(obj, "event_id", line);
  e.contributor_key = detail::required_string(obj, "contributor_key", line);
  e.email = detail::optional_string(obj, "email", line);
  e.display_name = detail::optional_string(obj, "display_name", line);
  if (!obj.contains("timestamp") || !obj["timestamp"].is_number_integer()) {
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": field 'timestamp' must be an integer");
  }
  e.timestamp = obj["timestamp"].get<Timestamp>();
  const auto kind_text = detail::required_string(obj, "kind", line);
  const auto kind = parse_event_kind(kind_text);
  if (!kind) fail(ErrorKind::parse, "line " + std::to_string(line) + ": unknown kind '" + kind_text + "'");
  e.kind = *kind;
  e.repo = detail::required_string(obj, "repo", line);
  if (!obj.contains("tags") || !obj["tags"].is_array()) {
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": field 'tags' must be an array");
  }
  for (const auto& t : obj["tags"]) {
    if (!t.is_string()) fail(ErrorKind::parse, "line " + std::to_string(line) + ": tags must be strings");
    e.tags.push_back(t.get<std::string>());
  }
  try {
    validate(e);
  } catch (const Error& ex) {
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": " + ex.what());
  }
  return e;
}

// One event per line; blank lines are skipped. Event ids must be unique.
inline std::vector<ContributionEvent> read_events_jsonl(std::istream& in) {
  std::vector<ContributionEvent> events;
  std::unordered_map<std::string, std::size_t> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    auto e = parse_event_line(text, line);
    auto [it, fresh] = seen.emplace(e.event_id, line);
    if (!fresh) {
      fail(ErrorKind::conflict, "line " + std::to_string(line) + ": duplicate event_id '" + e.event_id +
                                    "' (first seen on line " + std::to_string(it->second) + ")");
    }
    events.push_back(std::move(e));
  }
  return events;
}

inline std::vector<ContributionEvent> load_events_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::not_found, "cannot open event file " + path.string());
  return read_events_jsonl(in);
}

inline void write_events_jsonl(std::ostream& out, std::span<const ContributionEvent> events) {
  for (const auto& e : events) out << to_json(e).dump() << '\n';
}

inline std::string events_to_jsonl(std::span<const ContributionEvent> events) {
  std::ostringstream out;
  write_events_jsonl(out, events);
  return out.str();
}

}  // namespace retain
