#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "retain/config.hpp"
#include "retain/core/demographics.hpp"
#include "retain/core/identity.hpp"
#include "retain/engagement/outbox.hpp"
#include "retain/engagement/schedule.hpp"
#include "retain/engagement/templates.hpp"
#include "retain/impact/impact.hpp"
#include "retain/ingest/affiliation.hpp"
#include "retain/ingest/inference.hpp"
#include "retain/ingest/jsonl.hpp"
#include "retain/ingest/remote.hpp"
#include "retain/survival/model.hpp"

namespace retain {

// Read-only view of one project at its last committed state.
struct ProjectSnapshot {
  std::string name;
  std::vector<ContributionEvent> events;  // bots already removed when configured
  Community community;
  EventsById events_by_id;
  std::optional<std::string> latest_model;
};

struct IngestSummary {
  std::size_t added = 0;
  std::size_t total = 0;
  std::vector<std::string> inference_errors;
};

inline void validate_project_name(const std::string& name) {
  const bool ok = !name.empty() && name.front() != '.' && name.size() <= 128 &&
                  std::all_of(name.begin(), name.end(), [](unsigned char c) {
                    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
                  });
  if (!ok) fail(ErrorKind::validation, "invalid project name '" + name + "'");
}

// Directory of JSON documents:
//   retain.json                      operator config
//   accounts.json sessions.json audit.json
//   projects/{p}/events.jsonl        raw events in ingestion order
//   projects/{p}/project.json        as_of, merge hints, demographics, status snapshot
//   projects/{p}/schedules.json
//   projects/{p}/templates.json      optional overrides of the default templates
//   projects/{p}/models/{m}.json
//   projects/{p}/outbox/{created_at}-{message_id}.json
class ProjectStore {
 public:
  explicit ProjectStore(std::filesystem::path data_dir)
      : ProjectStore(data_dir, load_config(data_dir)) {}

  ProjectStore(std::filesystem::path data_dir, Config config) : dir_(std::move(data_dir)), config_(std::move(config)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& data_dir() const { return dir_; }
  const Config& config() const { return config_; }

  std::vector<std::string> projects() const {
    std::vector<std::string> out;
    const auto root = dir_ / "projects";
    if (!std::filesystem::exists(root)) return out;
    for (const auto& e : std::filesystem::directory_iterator(root)) {
      if (e.is_directory()) out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool has_project(const std::string& name) const {
    validate_project_name(name);
    return std::filesystem::exists(project_dir(name) / "events.jsonl");
  }

  // Creates the project if needed. `as_of` pins the observation instant.
  IngestSummary ingest(const std::string& name, std::span<const ContributionEvent> incoming,
                       std::optional<Timestamp> as_of = std::nullopt) {
    validate_project_name(name);
    std::lock_guard lock(mutex_);
    auto events = read_events(name);
    IngestSummary summary;
    summary.added = merge_events(events, incoming);
    summary.total = events.size();
    write_file_atomic(project_dir(name) / "events.jsonl", events_to_jsonl(events));
    Json meta = read_meta(name);
    if (as_of) meta["as_of"] = *as_of;
    write_meta(name, meta);
    cache_.erase(name);

    // Inference only fills contributors that have no stored record yet.
    auto snap = build(name);
    const auto plugin = load_inference_table(config_);
    Community pending;
    pending.policy = snap->community.policy;
    for (const auto& c : snap->community.contributors) {
      if (!c.demographics) pending.contributors.push_back(c);
    }
    summary.inference_errors = infer_community_demographics(pending, plugin, config_.inference_threshold);
    bool changed = false;
    for (const auto& c : pending.contributors) {
      if (c.demographics) {
        meta["demographics"][c.contributor_id] = to_json(*c.demographics);
        changed = true;
      }
    }
    if (changed) write_meta(name, meta);
    cache_.erase(name);
    return summary;
  }

  std::shared_ptr<const ProjectSnapshot> snapshot(const std::string& name) const {
    validate_project_name(name);
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(name); it != cache_.end()) return it->second;
    if (!std::filesystem::exists(project_dir(name))) fail(ErrorKind::not_found, "unknown project '" + name + "'");
    auto snap = build(name);
    cache_[name] = snap;
    return snap;
  }

  // Empty snapshot for a project that has no data yet.
  std::shared_ptr<const ProjectSnapshot> snapshot_or_empty(const std::string& name) const {
    validate_project_name(name);
    if (!std::filesystem::exists(project_dir(name))) {
      auto snap = std::make_shared<ProjectSnapshot>();
      snap->name = name;
      snap->community.policy = config_.policy;
      return snap;
    }
    return snapshot(name);
  }

  void add_merge_hint(const std::string& name, const MergeHint& hint) {
    require_project(name);
    std::lock_guard lock(mutex_);
    Json meta = read_meta(name);
    meta["merge_hints"].push_back({{"alias", hint.alias}, {"canonical", hint.canonical}});
    auto saved = meta;
    write_meta(name, meta);
    cache_.erase(name);
    try {
      build(name);
    } catch (...) {
      saved["merge_hints"].erase(saved["merge_hints"].size() - 1);
      write_meta(name, saved);
      throw;
    }
  }

  // Self-report or correction; returns the updated contributor.
  Contributor record_demographics(const std::string& name, const std::string& contributor_id,
                                  const Demographics& payload) {
    require_project(name);
    std::lock_guard lock(mutex_);
    auto snap = build(name);
    Contributor c;
    if (const Contributor* found = snap->community.find(contributor_id)) {
      c = *found;
    } else {
      fail(ErrorKind::not_found, "unknown contributor " + contributor_id);
    }
    Demographics incoming = payload;
    if (incoming.source == DemographicSource::inferred) incoming.source = DemographicSource::self_reported;
    DemographicPrecedence precedence{config_.corrections_override_self_reports};
    apply_demographics(c, incoming, precedence);
    Json meta = read_meta(name);
    meta["demographics"][contributor_id] = to_json(*c.demographics);
    write_meta(name, meta);
    cache_.erase(name);
    return c;
  }

  std::optional<std::map<std::string, Status>> status_snapshot(const std::string& name) const {
    std::lock_guard lock(mutex_);
    const Json meta = read_meta(name);
    if (!meta.contains("status_snapshot")) return std::nullopt;
    std::map<std::string, Status> out;
    for (const auto& [id, s] : meta["status_snapshot"].items()) {
      for (auto st : {Status::newcomer, Status::active, Status::inactive, Status::departed}) {
        if (to_string(st) == s.get<std::string>()) out[id] = st;
      }
    }
    return out;
  }

  void save_status_snapshot(const std::string& name, const std::map<std::string, Status>& statuses) {
    std::lock_guard lock(mutex_);
    Json meta = read_meta(name);
    Json j = Json::object();
    for (const auto& [id, s] : statuses) j[id] = to_string(s);
    meta["status_snapshot"] = std::move(j);
    write_meta(name, meta);
  }

  // ---- models -----------------------------------------------------------

  void save_model(const std::string& name, const FittedModel& model) {
    require_project(name);
    std::lock_guard lock(mutex_);
    write_file_atomic(project_dir(name) / "models" / (model.model_id + ".json"), to_json(model).dump());
    Json meta = read_meta(name);
    meta["latest_model"] = model.model_id;
    write_meta(name, meta);
    cache_.erase(name);
  }

  struct StoredModel {
    std::string project;
    FittedModel model;
  };

  StoredModel load_model(const std::string& model_id) const {
    const bool ok = !model_id.empty() && std::all_of(model_id.begin(), model_id.end(), [](unsigned char c) {
      return std::isalnum(c) || c == '-';
    });
    if (!ok) fail(ErrorKind::not_found, "unknown model '" + model_id + "'");
    for (const auto& p : projects()) {
      const auto path = project_dir(p) / "models" / (model_id + ".json");
      if (std::filesystem::exists(path)) return {p, model_from_json(Json::parse(read_file(path)))};
    }
    fail(ErrorKind::not_found, "unknown model '" + model_id + "'");
  }

  // ---- engagement -------------------------------------------------------

  std::vector<Schedule> schedules(const std::string& name) const {
    std::lock_guard lock(mutex_);
    std::vector<Schedule> out;
    const auto path = project_dir(name) / "schedules.json";
    if (!std::filesystem::exists(path)) return out;
    for (const auto& j : Json::parse(read_file(path))) out.push_back(schedule_from_json(j));
    return out;
  }

  void save_schedules(const std::string& name, const std::vector<Schedule>& schedules) {
    require_project(name);
    std::lock_guard lock(mutex_);
    Json arr = Json::array();
    for (const auto& s : schedules) arr.push_back(to_json(s));
    write_file_atomic(project_dir(name) / "schedules.json", arr.dump(2));
  }

  std::vector<MessageTemplate> templates(const std::string& name) const {
    const auto path = project_dir(name) / "templates.json";
    if (!std::filesystem::exists(path)) return default_templates();
    std::vector<MessageTemplate> out;
    for (const auto& j : Json::parse(read_file(path))) out.push_back(template_from_json(j));
    return out;
  }

  Outbox& outbox(const std::string& name) {
    validate_project_name(name);
    std::lock_guard lock(mutex_);
    auto& slot = outboxes_[name];
    if (!slot) {
      slot = std::make_unique<Outbox>(project_dir(name) / "outbox");
      slot->set_daily_cap(config_.daily_message_cap);
    }
    return *slot;
  }

  std::filesystem::path project_dir(const std::string& name) const { return dir_ / "projects" / name; }

 private:
  void require_project(const std::string& name) const {
    validate_project_name(name);
    if (!std::filesystem::exists(project_dir(name))) fail(ErrorKind::not_found, "unknown project '" + name + "'");
  }

  std::vector<ContributionEvent> read_events(const std::string& name) const {
    const auto path = project_dir(name) / "events.jsonl";
    if (!std::filesystem::exists(path)) return {};
    return load_events_jsonl(path);
  }

  Json read_meta(const std::string& name) const {
    const auto path = project_dir(name) / "project.json";
    Json meta;
    if (std::filesystem::exists(path)) meta = Json::parse(read_file(path));
    if (!meta.is_object()) meta = Json::object();
    if (!meta.contains("format_version")) meta["format_version"] = 1;
    if (!meta.contains("as_of")) meta["as_of"] = nullptr;
    if (!meta.contains("merge_hints")) meta["merge_hints"] = Json::array();
    if (!meta.contains("demographics")) meta["demographics"] = Json::object();
    return meta;
  }

  void write_meta(const std::string& name, const Json& meta) const {
    write_file_atomic(project_dir(name) / "project.json", meta.dump(2));
  }

  std::shared_ptr<ProjectSnapshot> build(const std::string& name) const {
    auto snap = std::make_shared<ProjectSnapshot>();
    snap->name = name;
    auto all = read_events(name);
    snap->events = config_.exclude_bots ? without_bots(all) : std::move(all);
    const Json meta = read_meta(name);
    LifecyclePolicy policy = config_.policy;
    if (!meta["as_of"].is_null()) policy.as_of = meta["as_of"].get<Timestamp>();
    std::vector<MergeHint> hints;
    for (const auto& h : meta["merge_hints"]) {
      hints.push_back({h.at("alias").get<std::string>(), h.at("canonical").get<std::string>()});
    }
    snap->community = resolve_identities(snap->events, hints, policy);
    assign_affiliations(snap->community, config_.public_domains);
    for (const auto& [id, d] : meta["demographics"].items()) {
      if (Contributor* c = snap->community.find(id)) c->demographics = demographics_from_json(d);
    }
    snap->events_by_id = events_by_contributor(snap->events, snap->community);
    if (meta.contains("latest_model") && meta["latest_model"].is_string()) {
      snap->latest_model = meta["latest_model"].get<std::string>();
    }
    return snap;
  }

  std::filesystem::path dir_;
  Config config_;
  mutable std::recursive_mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const ProjectSnapshot>> cache_;
  std::map<std::string, std::unique_ptr<Outbox>> outboxes_;
};

}  // namespace retain
