#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "retain/error.hpp"
#include "retain/json.hpp"

namespace retain {

enum class TemplateKind { welcome, offboarding, wellness_survey, report };

inline std::string_view to_string(TemplateKind k) {
  switch (k) {
    case TemplateKind::welcome: return "welcome";
    case TemplateKind::offboarding: return "offboarding";
    case TemplateKind::wellness_survey: return "wellness_survey";
    case TemplateKind::report: return "report";
  }
  return "";
}

inline std::optional<TemplateKind> parse_template_kind(std::string_view text) {
  for (auto k : {TemplateKind::welcome, TemplateKind::offboarding, TemplateKind::wellness_survey, TemplateKind::report}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

struct MessageTemplate {
  std::string template_id;
  TemplateKind kind = TemplateKind::welcome;
  std::string subject;
  std::string body;
};

struct RenderedMessage {
  std::string subject;
  std::string body;
};

using TemplateContext = std::map<std::string, std::string>;

inline const std::set<std::string>& template_placeholders() {
  static const std::set<std::string> names = {"display_name", "project", "first_contribution_link", "survey_link",
                                              "report"};
  return names;
}

namespace detail {

// Visits literal runs and {{name}} placeholders in order.
template <typename OnText, typename OnPlaceholder>
void scan_template(std::string_view text, OnText on_text, OnPlaceholder on_placeholder) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    on_text(text.substr(pos, open - pos));
    on_placeholder(std::string(text.substr(open + 2, close - open - 2)));
    pos = close + 2;
  }
  on_text(text.substr(pos));
}

inline std::string render_text(std::string_view text, const TemplateContext& context) {
  std::string out;
  scan_template(
      text, [&](std::string_view literal) { out.append(literal); },
      [&](const std::string& name) {
        auto it = context.find(name);
        if (it == context.end()) fail(ErrorKind::validation, "missing value for placeholder '" + name + "'");
        out.append(it->second);
      });
  return out;
}

}  // namespace detail

inline std::set<std::string> placeholders_in(std::string_view text) {
  std::set<std::string> found;
  detail::scan_template(text, [](std::string_view) {}, [&](const std::string& name) { found.insert(name); });
  return found;
}

inline void validate(const MessageTemplate& t) {
  for (const auto* text : {&t.subject, &t.body}) {
    for (const auto& name : placeholders_in(*text)) {
      if (!template_placeholders().count(name)) {
        fail(ErrorKind::validation, "template " + t.template_id + " uses unknown placeholder '" + name + "'");
      }
    }
  }
}

// Single-pass substitution: substituted values are copied verbatim and never
// re-scanned for placeholders.
inline RenderedMessage render_template(const MessageTemplate& t, const TemplateContext& context) {
  return {detail::render_text(t.subject, context), detail::render_text(t.body, context)};
}

inline std::vector<MessageTemplate> default_templates() {
  return {
      {"welcome", TemplateKind::welcome, "Welcome to {{project}}, {{display_name}}!",
       "Hi {{display_name}},\n\nThank you for your first contribution to {{project}} ({{first_contribution_link}}). "
       "We're glad you're here; reply to this message if you would like a mentor.\n"},
      {"offboarding", TemplateKind::offboarding, "Thank you from {{project}}",
       "Hi {{display_name}},\n\nWe noticed you have not contributed to {{project}} in a while. Thank you for "
       "everything you did. If you are willing, tell us how your experience was: {{survey_link}}\n"},
      {"wellness_survey", TemplateKind::wellness_survey, "How is {{project}} treating you?",
       "Hi {{display_name}},\n\nWe run a short pulse-check survey for {{project}} contributors: {{survey_link}}\n"},
      {"report", TemplateKind::report, "{{project}} community health report", "{{report}}"},
  };
}

inline Json to_json(const MessageTemplate& t) {
  Json j;
  j["template_id"] = t.template_id;
  j["kind"] = to_string(t.kind);
  j["subject"] = t.subject;
  j["body"] = t.body;
  return j;
}

inline MessageTemplate template_from_json(const Json& j) {
  MessageTemplate t;
  t.template_id = j.at("template_id").get<std::string>();
  const auto kind = parse_template_kind(j.at("kind").get<std::string>());
  if (!kind) fail(ErrorKind::validation, "unknown template kind");
  t.kind = *kind;
  t.subject = j.at("subject").get<std::string>();
  t.body = j.at("body").get<std::string>();
  validate(t);
  return t;
}

}  // namespace retain
