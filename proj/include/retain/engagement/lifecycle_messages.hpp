#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retain/core/identity.hpp"
#include "retain/engagement/outbox.hpp"
#include "retain/engagement/templates.hpp"
#include "retain/hash.hpp"

namespace retain {

struct StatusTransition {
  std::string contributor_id;
  std::optional<Status> from;  // nullopt for a first sighting
  Status to = Status::active;
  Timestamp at = 0;
};

// Diff of current statuses against the last recorded snapshot.
inline std::vector<StatusTransition> detect_transitions(const std::map<std::string, Status>& previous,
                                                        const Community& community, Timestamp at) {
  std::vector<StatusTransition> out;
  for (const auto& c : community.contributors) {
    auto it = previous.find(c.contributor_id);
    if (it != previous.end() && it->second == c.status) continue;
    out.push_back({c.contributor_id, it == previous.end() ? std::nullopt : std::optional<Status>(it->second), c.status, at});
  }
  return out;
}

inline std::map<std::string, Status> status_snapshot(const Community& community) {
  std::map<std::string, Status> out;
  for (const auto& c : community.contributors) out[c.contributor_id] = c.status;
  return out;
}

struct MessagingContext {
  std::string project;
  std::string project_url;
  std::string survey_link;
};

struct LifecycleMessages {
  std::vector<OutboxMessage> messages;
  std::vector<std::string> undeliverable;  // contributor ids without email
};

namespace detail {

inline const MessageTemplate& template_of(const std::vector<MessageTemplate>& templates, TemplateKind kind) {
  for (const auto& t : templates) {
    if (t.kind == kind) return t;
  }
  fail(ErrorKind::not_found, "no template of kind " + std::string(to_string(kind)));
}

inline TemplateContext context_for(const Contributor& c, const MessagingContext& ctx) {
  return {{"display_name", c.display_name},
          {"project", ctx.project},
          {"first_contribution_link", ctx.project_url},
          {"survey_link", ctx.survey_link}};
}

}  // namespace detail

// Welcome on entering newcomer status, offboarding on departure. Ids derive
// from (contributor, trigger), so each pair is messaged at most once ever.
inline LifecycleMessages trigger_lifecycle_messages(const std::vector<StatusTransition>& transitions,
                                                    const Community& community,
                                                    const std::vector<MessageTemplate>& templates,
                                                    const MessagingContext& ctx, Outbox& outbox) {
  LifecycleMessages out;
  for (const auto& t : transitions) {
    std::optional<Trigger> trigger;
    if (t.to == Status::newcomer) trigger = Trigger::newcomer;
    if (t.to == Status::departed) trigger = Trigger::departure;
    if (!trigger) continue;
    const Contributor* c = community.find(t.contributor_id);
    if (!c) continue;
    const auto id = stable_id("msg-", "lifecycle|" + t.contributor_id + "|" + std::string(to_string(*trigger)));
    if (outbox.contains(id)) continue;
    if (c->emails.empty()) {
      out.undeliverable.push_back(t.contributor_id);
      continue;
    }
    const auto& tpl = detail::template_of(
        templates, *trigger == Trigger::newcomer ? TemplateKind::welcome : TemplateKind::offboarding);
    const auto rendered = render_template(tpl, detail::context_for(*c, ctx));
    OutboxMessage m{id, rendered.subject, rendered.body, *c->emails.begin(), t.at, *trigger};
    if (outbox.append(m)) out.messages.push_back(std::move(m));
  }
  return out;
}

// Pulse-check survey to every newcomer or active contributor with an email.
inline std::vector<OutboxMessage> send_wellness_survey(const Community& community,
                                                       const std::vector<MessageTemplate>& templates,
                                                       const MessagingContext& ctx, Timestamp now, Outbox& outbox) {
  const auto& tpl = detail::template_of(templates, TemplateKind::wellness_survey);
  std::vector<OutboxMessage> out;
  for (const auto& c : community.contributors) {
    if (c.emails.empty() || (c.status != Status::active && c.status != Status::newcomer)) continue;
    const auto rendered = render_template(tpl, detail::context_for(c, ctx));
    OutboxMessage m{stable_id("msg-", "survey|" + c.contributor_id + "|" + std::to_string(floor_days(now))),
                    rendered.subject, rendered.body, *c.emails.begin(), now, Trigger::manual};
    if (outbox.append(m)) out.push_back(std::move(m));
  }
  return out;
}

}  // namespace retain
