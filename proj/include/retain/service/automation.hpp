#pragma once

#include <optional>
#include <string>
#include <vector>

#include "retain/engagement/lifecycle_messages.hpp"
#include "retain/engagement/report.hpp"
#include "retain/engagement/schedule.hpp"
#include "retain/service/store.hpp"
#include "retain/service/views.hpp"

namespace retain {

// Risk ranking from the project's most recent model, if any.
inline std::optional<std::vector<RiskScore>> latest_risk(const ProjectStore& store, const ProjectSnapshot& snap) {
  if (!snap.latest_model) return std::nullopt;
  return risk_for(snap, store.load_model(*snap.latest_model).model);
}

inline ProjectReport report_for(const ProjectStore& store, const ProjectSnapshot& snap,
                                std::optional<std::string> model_id = std::nullopt) {
  std::optional<std::vector<RiskScore>> risk;
  if (model_id) {
    risk = risk_for(snap, store.load_model(*model_id).model);
  } else {
    risk = latest_risk(store, snap);
  }
  return generate_report(snap.community, snap.events, risk, store.config().report_period_days);
}

struct AutomationRun {
  std::vector<OutboxMessage> scheduled;
  std::vector<OutboxMessage> lifecycle;
  std::vector<std::string> undeliverable;
};

inline Json to_json(const AutomationRun& r) {
  Json j;
  j["scheduled"] = Json::array();
  for (const auto& m : r.scheduled) j["scheduled"].push_back(to_json(m));
  j["lifecycle"] = Json::array();
  for (const auto& m : r.lifecycle) j["lifecycle"].push_back(to_json(m));
  j["undeliverable"] = r.undeliverable;
  return j;
}

// One scheduler tick: fires due schedules, then messages status transitions
// since the previous tick. Contributors first seen already departed get no
// offboarding message.
inline AutomationRun run_automation(ProjectStore& store, const std::string& project, Timestamp now) {
  const auto snap = store.snapshot(project);
  Outbox& outbox = store.outbox(project);
  const auto templates = store.templates(project);
  AutomationRun run;

  auto schedules = store.schedules(project);
  const ReportRenderer render = [&](const Schedule&, Timestamp) {
    const auto text = render_report_text(report_for(store, *snap), project);
    return render_template(detail::template_of(templates, TemplateKind::report),
                           {{"project", project}, {"report", text}});
  };
  run.scheduled = run_due_schedules(schedules, now, render, outbox);
  store.save_schedules(project, schedules);

  const auto previous = store.status_snapshot(project).value_or(std::map<std::string, Status>{});
  auto transitions = detect_transitions(previous, snap->community, now);
  std::erase_if(transitions, [](const StatusTransition& t) { return !t.from && t.to == Status::departed; });
  const MessagingContext ctx{project, store.config().project_url, store.config().survey_link};
  auto lifecycle = trigger_lifecycle_messages(transitions, snap->community, templates, ctx, outbox);
  run.lifecycle = std::move(lifecycle.messages);
  run.undeliverable = std::move(lifecycle.undeliverable);
  store.save_status_snapshot(project, status_snapshot(snap->community));
  return run;
}

}  // namespace retain
