#pragma once

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retain/cli/format.hpp"
#include "retain/ingest/synthetic.hpp"
#include "retain/service/automation.hpp"
#include "retain/service/server.hpp"
#include "retain/service/views.hpp"

namespace retain::cli {

struct Output {
  Json json;
  std::optional<std::string> text;  // replaces the generic human rendering
};

inline std::string default_data_dir() {
  if (const char* v = std::getenv("RETAIN_DATA_DIR")) return v;
  return "retain-data";
}

// Integer seconds or ISO 8601.
inline Timestamp parse_time_arg(const std::string& text, const std::string& name) {
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::stoll(text);
  }
  try {
    return parse_iso8601(text);
  } catch (const Error&) {
    fail(ErrorKind::validation, "invalid time for " + name + ": '" + text + "'");
  }
}

inline std::optional<Timestamp> optional_time(const std::string& text, const std::string& name) {
  if (text.empty()) return std::nullopt;
  return parse_time_arg(text, name);
}

// "name:share:hazard"
inline void add_synthetic_group(SyntheticSpec& spec, const std::string& text) {
  const auto a = text.find(':');
  const auto b = text.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    fail(ErrorKind::validation, "group must look like name:share:hazard, got '" + text + "'");
  }
  const auto name = text.substr(0, a);
  try {
    spec.group_shares[name] = std::stod(text.substr(a + 1, b - a - 1));
    spec.group_hazard_per_day[name] = std::stod(text.substr(b + 1));
  } catch (const std::logic_error&) {
    fail(ErrorKind::validation, "group must look like name:share:hazard, got '" + text + "'");
  }
}

inline std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= text.size() && !text.empty()) {
    const auto j = text.find(',', i);
    const auto piece = text.substr(i, j == std::string::npos ? std::string::npos : j - i);
    if (!piece.empty()) out.push_back(piece);
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

// First positional word, when it names no subcommand.
inline std::optional<std::string> unknown_command(CLI::App& app, const std::vector<std::string>& args) {
  static const std::set<std::string> valued = {"--project", "--data-dir", "--seed"};
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (valued.count(args[i])) {
      ++i;
      continue;
    }
    if (args[i].rfind("-", 0) == 0) continue;
    if (app.get_subcommand_no_throw(args[i])) return std::nullopt;
    return args[i];
  }
  return std::nullopt;
}

// `retain <command> [--project NAME] [--data-dir PATH] [--json] [--seed N] ...`
// Exit codes: 0 success, 1 runtime error, 2 usage error.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contributor retention analytics", "retain"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string project = "default";
  std::string data_dir = default_data_dir();
  bool json = false;
  std::uint64_t seed_value = 0;
  app.add_option("--project", project, "Project name");
  app.add_option("--data-dir", data_dir, "Data directory (default $RETAIN_DATA_DIR or ./retain-data)");
  app.add_flag("--json", json, "Machine-readable JSON on stdout");
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for synthetic data and model fitting");

  std::function<Output()> action;
  std::optional<ProjectStore> store_slot;
  auto store = [&]() -> ProjectStore& {
    if (!store_slot) store_slot.emplace(data_dir);
    return *store_slot;
  };
  auto seed = [&] { return seed_opt->count() ? seed_value : store().config().default_seed; };

  // ---- init-admin
  auto* init_admin = app.add_subcommand("init-admin", "Create an administrator account");
  std::string admin_login, admin_password, admin_password_env;
  init_admin->add_option("--login", admin_login)->required();
  init_admin->add_option("--password", admin_password);
  init_admin->add_option("--password-env", admin_password_env, "Read the password from this environment variable");
  init_admin->callback([&] {
    action = [&] {
      std::string password = admin_password;
      if (!admin_password_env.empty()) {
        const char* v = std::getenv(admin_password_env.c_str());
        if (!v) fail(ErrorKind::validation, "environment variable " + admin_password_env + " is not set");
        password = v;
      }
      const auto& cfg = store().config();
      AuthStore auth(store().data_dir(), {cfg.pbkdf2_iterations, cfg.session_ttl_hours});
      return Output{to_json(auth.create_admin(admin_login, password)), std::nullopt};
    };
  });

  // ---- ingest
  auto* ingest = app.add_subcommand("ingest", "Ingest contribution events");
  ingest->fallthrough();
  ingest->require_subcommand(1, 1);
  std::vector<std::string> hints;
  ingest->add_option("--merge-hint", hints, "alias=canonical identity hint (repeatable)");
  auto finish_ingest = [&](std::span<const ContributionEvent> events, std::optional<Timestamp> as_of) {
    auto summary = store().ingest(project, events, as_of);
    for (const auto& h : hints) {
      const auto eq = h.find('=');
      if (eq == std::string::npos) fail(ErrorKind::validation, "merge hint must be alias=canonical, got '" + h + "'");
      store().add_merge_hint(project, {h.substr(0, eq), h.substr(eq + 1)});
    }
    Json j;
    j["project"] = project;
    j["added"] = summary.added;
    j["total"] = summary.total;
    j["inference_errors"] = summary.inference_errors;
    return j;
  };

  auto* ingest_jsonl = ingest->add_subcommand("jsonl", "Events from a JSONL file");
  std::string jsonl_path, jsonl_as_of;
  ingest_jsonl->add_option("file", jsonl_path)->required();
  ingest_jsonl->add_option("--as-of", jsonl_as_of, "Observation instant (seconds or ISO 8601)");
  ingest_jsonl->callback([&] {
    action = [&] {
      const auto events = load_events_jsonl(jsonl_path);
      return Output{finish_ingest(events, optional_time(jsonl_as_of, "--as-of")), std::nullopt};
    };
  });

  auto* ingest_remote = ingest->add_subcommand("remote", "Events from a GitHub-compatible REST API");
  std::string remote_url, remote_repo, remote_since;
  ingest_remote->add_option("--url", remote_url, "API base URL")->required();
  ingest_remote->add_option("--repo", remote_repo, "owner/name")->required();
  ingest_remote->add_option("--since", remote_since);
  ingest_remote->callback([&] {
    action = [&] {
      IngestSource source{SourceKind::remote_api, remote_url, remote_repo, store().config().token_env};
      const auto report = fetch_remote_events(source, optional_time(remote_since, "--since").value_or(0));
      Json j = finish_ingest(report.events, std::nullopt);
      j["requests"] = report.requests;
      j["retries"] = report.retries;
      return Output{j, std::nullopt};
    };
  });

  auto* ingest_synthetic = ingest->add_subcommand("synthetic", "Seeded synthetic community");
  SyntheticSpec spec;
  spec.n_contributors = 500;
  std::vector<std::string> groups;
  std::string truth_path;
  ingest_synthetic->add_option("--contributors", spec.n_contributors);
  ingest_synthetic->add_option("--horizon", spec.horizon_days, "Observation horizon in days");
  ingest_synthetic->add_option("--group", groups, "name:share:hazard (repeatable)");
  ingest_synthetic->add_option("--events-per-week", spec.events_per_active_week);
  ingest_synthetic->add_option("--join-spread", spec.join_spread_days);
  ingest_synthetic->add_option("--tail", spec.detection_tail_days, "Silent days appended after the horizon");
  ingest_synthetic->add_option("--truth", truth_path, "Write ground truth as JSONL");
  ingest_synthetic->callback([&] {
    action = [&] {
      spec.seed = seed();
      if (groups.empty()) groups = {"volunteer:0.5:0.01", "corporate:0.5:0.001"};
      for (const auto& g : groups) add_synthetic_group(spec, g);
      const auto community = generate_synthetic_community(spec);
      if (!truth_path.empty()) {
        std::string lines;
        for (const auto& t : community.truth) {
          Json tj;
          tj["contributor_key"] = t.contributor_key;
          tj["group"] = t.group;
          tj["duration_days"] = t.duration_days;
          tj["event"] = t.event;
          lines += tj.dump() + "\n";
        }
        write_file_atomic(truth_path, lines);
      }
      Json j = finish_ingest(community.events, community.observation_end);
      j["observation_end"] = community.observation_end;
      return Output{j, std::nullopt};
    };
  });

  // ---- metrics
  auto* metrics = app.add_subcommand("metrics", "Overview metrics, activity or a demographic distribution");
  std::string start_text, end_text, lens_text;
  int bucket_days = 0;
  metrics->add_option("--start", start_text);
  metrics->add_option("--end", end_text);
  metrics->add_option("--lens", lens_text, "affiliation|gender|region|newcomer_status");
  metrics->add_option("--bucket-days", bucket_days, "Activity time series with this bucket width");
  metrics->callback([&] {
    action = [&] {
      const auto snap = store().snapshot_or_empty(project);
      if (!lens_text.empty()) {
        const auto lens = parse_lens(lens_text);
        if (!lens) fail(ErrorKind::validation, "unknown lens '" + lens_text + "'");
        return Output{distribution_view(*snap, *lens), std::nullopt};
      }
      const auto start = optional_time(start_text, "--start");
      const auto end = optional_time(end_text, "--end");
      if (bucket_days > 0) return Output{activity_view(*snap, bucket_days, start, end), std::nullopt};
      return Output{to_json(overview_for(*snap, start, end)), std::nullopt};
    };
  });

  // ---- survival
  auto* survival = app.add_subcommand("survival", "Kaplan-Meier curves, optionally by lens");
  std::string group_by;
  int window_days = 0;
  survival->add_option("--group-by", group_by);
  survival->add_option("--window", window_days, "Feature window in days");
  survival->callback([&] {
    action = [&] {
      std::optional<Lens> lens;
      if (!group_by.empty()) {
        lens = parse_lens(group_by);
        if (!lens) fail(ErrorKind::validation, "unknown lens '" + group_by + "'");
      }
      const int w = window_days > 0 ? window_days : store().config().feature_window_days;
      return Output{survival_view(*store().snapshot_or_empty(project), lens, w), std::nullopt};
    };
  });

  // ---- fit
  auto* fit = app.add_subcommand("fit", "Fit an attrition model");
  std::string kind_text = "cox", features_text;
  FitRequest fit_req;
  fit->add_option("--kind", kind_text, "cox|rsf|nncox");
  fit->add_option("--features", features_text, "Comma-separated feature names");
  fit->add_option("--window", window_days, "Feature window in days");
  fit->add_option("--train-fraction", fit_req.train_fraction);
  fit->add_option("--trees", fit_req.trees);
  fit->callback([&] {
    action = [&] {
      const auto kind = parse_model_kind(kind_text);
      if (!kind) fail(ErrorKind::validation, "unknown model kind '" + kind_text + "'");
      fit_req.kind = *kind;
      fit_req.features = split_csv(features_text);
      fit_req.feature_window_days = window_days > 0 ? window_days : store().config().feature_window_days;
      fit_req.seed = seed();
      const auto model = fit_for(*store().snapshot_or_empty(project), fit_req);
      store().save_model(project, model);
      Json j = model_summary_json(model);
      j["project"] = project;
      return Output{j, std::nullopt};
    };
  });

  // ---- predict
  auto* predict = app.add_subcommand("predict", "Rank non-departed contributors by attrition risk");
  std::string model_id;
  int top = 0;
  predict->add_option("--model", model_id, "Model id (default: latest for the project)");
  predict->add_option("--top", top, "Keep only the N highest-risk contributors");
  auto resolve_model = [&](const ProjectSnapshot& snap) {
    if (!model_id.empty()) return store().load_model(model_id).model;
    if (!snap.latest_model) fail(ErrorKind::not_found, "no model fitted for project '" + project + "'");
    return store().load_model(*snap.latest_model).model;
  };
  predict->callback([&] {
    action = [&] {
      const auto snap = store().snapshot(project);
      const auto model = resolve_model(*snap);
      auto scores = risk_for(*snap, model);
      if (top > 0 && scores.size() > static_cast<std::size_t>(top)) scores.resize(static_cast<std::size_t>(top));
      Json j;
      j["model_id"] = model.model_id;
      j["scores"] = to_json(std::span<const RiskScore>(scores));
      return Output{j, std::nullopt};
    };
  });

  // ---- impact
  auto* impact = app.add_subcommand("impact", "Impact scores and attrition severity");
  impact->add_option("--model", model_id, "Model whose top-ranked contributors are flagged at risk");
  impact->callback([&] {
    action = [&] {
      const auto snap = store().snapshot(project);
      std::optional<std::vector<RiskScore>> risk;
      if (!model_id.empty() || snap->latest_model) risk = risk_for(*snap, resolve_model(*snap));
      return Output{impact_view(*snap, risk, store().config().moderate_share), std::nullopt};
    };
  });

  // ---- tags
  auto* tags = app.add_subcommand("tags", "Tag profiles");
  std::string tag;
  int top_k = kDefaultTopContributors;
  tags->add_option("--tag", tag, "Show one tag with its top contributors");
  tags->add_option("--top", top_k);
  tags->callback([&] {
    action = [&] {
      const auto snap = store().snapshot(project);
      return Output{tag.empty() ? tags_view(*snap) : tag_view(*snap, tag, top_k), std::nullopt};
    };
  });

  // ---- rosters
  auto* newcomers = app.add_subcommand("newcomers", "Newcomer roster");
  newcomers->callback([&] {
    action = [&] { return Output{newcomers_view(*store().snapshot_or_empty(project)), std::nullopt}; };
  });
  auto* inactive = app.add_subcommand("inactive", "Inactive roster");
  inactive->callback([&] {
    action = [&] { return Output{inactive_view(*store().snapshot_or_empty(project)), std::nullopt}; };
  });

  // ---- report
  auto* report = app.add_subcommand("report", "Community health report");
  report->add_option("--model", model_id);
  report->callback([&] {
    action = [&] {
      const auto snap = store().snapshot_or_empty(project);
      const auto r = report_for(store(), *snap, model_id.empty() ? std::nullopt : std::optional(model_id));
      return Output{to_json(r), render_report_text(r, project)};
    };
  });

  // ---- schedules
  auto* schedules = app.add_subcommand("schedules", "Report schedules and engagement automation");
  schedules->fallthrough();
  schedules->require_subcommand(1, 1);
  auto* sched_add = schedules->add_subcommand("add", "Add a report schedule");
  Schedule new_schedule;
  std::string cadence_text = "weekly";
  sched_add->add_option("--cadence", cadence_text, "daily|weekly|monthly");
  sched_add->add_option("--at", new_schedule.at_utc, "HH:MM UTC");
  sched_add->add_option("--recipient", new_schedule.recipients)->required();
  sched_add->add_option("--report-kind", new_schedule.report_kind);
  sched_add->callback([&] {
    action = [&] {
      const auto cadence = parse_cadence(cadence_text);
      if (!cadence) fail(ErrorKind::validation, "cadence must be daily, weekly or monthly");
      new_schedule.cadence = *cadence;
      parse_hhmm(new_schedule.at_utc);
      store().snapshot(project);
      auto all = store().schedules(project);
      Json spec_json = to_json(new_schedule);
      new_schedule.schedule_id = stable_id("sch-", project + "|" + std::to_string(all.size()) + "|" + spec_json.dump());
      all.push_back(new_schedule);
      store().save_schedules(project, all);
      return Output{to_json(new_schedule), std::nullopt};
    };
  });
  auto* sched_list = schedules->add_subcommand("list", "List schedules");
  sched_list->callback([&] {
    action = [&] {
      Json arr = Json::array();
      for (const auto& s : store().schedules(project)) arr.push_back(to_json(s));
      return Output{arr, std::nullopt};
    };
  });
  auto* sched_run = schedules->add_subcommand("run", "Fire due schedules and lifecycle messages");
  std::string now_text;
  sched_run->add_option("--now", now_text, "Clock override (seconds or ISO 8601)");
  sched_run->callback([&] {
    action = [&] {
      const Timestamp now = now_text.empty() ? system_now() : parse_time_arg(now_text, "--now");
      return Output{to_json(run_automation(store(), project, now)), std::nullopt};
    };
  });

  // ---- serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->callback([&] {
    action = [&] {
      const auto& cfg = store().config();
      AuthStore auth(store().data_dir(), {cfg.pbkdf2_iterations, cfg.session_ttl_hours});
      Api api(store(), auth);
      api.set_logger([&](const std::string& line) { err << line << "\n"; });
      HttpServer server(api);
      const int bound = server.bind(host, port);
      err << "listening on " << host << ":" << bound << "\n";
      server.listen_after_bind();
      return Output{Json::object(), std::string()};
    };
  });

  std::vector<const char*> argv;
  argv.push_back("retain");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (auto unknown = unknown_command(app, args)) {
      err << "retain: unknown command '" << *unknown << "'\n" << app.help();
    } else {
      err << "retain: " << e.what() << "\n" << app.help();
    }
    return 2;
  }
  if (!action) {
    err << app.help();
    return 2;
  }

  try {
    const Output result = action();
    if (json) {
      out << result.json.dump(2) << "\n";
    } else if (result.text) {
      out << *result.text;
    } else {
      print_human(out, result.json);
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace retain::cli
