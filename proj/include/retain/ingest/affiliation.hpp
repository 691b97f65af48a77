#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "retain/core/identity.hpp"
#include "retain/core/types.hpp"

namespace retain {

// Free-mail providers whose domain says nothing about an employer.
inline std::set<std::string> default_public_domains() {
  return {"gmail.com", "googlemail.com", "outlook.com", "hotmail.com", "yahoo.com",
          "qq.com",    "proton.me",      "protonmail.com"};
}

// Multi-label public suffixes (a subset of the public suffix list). Single
// labels like "com" or "io" fall under the implicit "*" rule.
inline const std::set<std::string, std::less<>>& multi_label_public_suffixes() {
  static const std::set<std::string, std::less<>> suffixes = {
      "ac.uk",  "co.uk",  "gov.uk", "ltd.uk", "me.uk",  "net.uk", "org.uk", "plc.uk", "sch.uk",
      "com.au", "net.au", "org.au", "edu.au", "gov.au", "id.au",  "co.nz",  "org.nz", "net.nz",
      "ac.nz",  "co.jp",  "ne.jp",  "or.jp",  "ac.jp",  "go.jp",  "com.cn", "net.cn", "org.cn",
      "edu.cn", "gov.cn", "com.br", "net.br", "org.br", "co.in",  "net.in", "org.in", "ac.in",
      "co.kr",  "or.kr",  "ac.kr",  "com.mx", "org.mx", "com.tw", "org.tw", "edu.tw", "com.hk",
      "org.hk", "com.sg", "edu.sg", "co.za",  "org.za", "ac.za",  "com.tr", "co.il",  "ac.il",
      "com.ar", "com.ru", "co.id",  "ac.id",  "com.my", "co.th",  "ac.th",  "com.vn", "com.pl",
      "github.io"};
  return suffixes;
}

// Registrable domain = longest matching public suffix plus one label.
inline std::string registrable_domain(std::string_view host) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (start <= host.size()) {
    const auto dot = host.find('.', start);
    const auto end = dot == std::string_view::npos ? host.size() : dot;
    labels.push_back(host.substr(start, end - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (labels.size() <= 1) return std::string(host);
  std::size_t suffix_labels = 1;
  const auto& suffixes = multi_label_public_suffixes();
  for (std::size_t n = labels.size() - 1; n >= 2; --n) {
    const auto offset = static_cast<std::size_t>(labels[labels.size() - n].data() - host.data());
    if (suffixes.count(host.substr(offset))) {
      suffix_labels = n;
      break;
    }
  }
  if (suffix_labels >= labels.size()) return std::string(host);
  const auto offset = static_cast<std::size_t>(labels[labels.size() - suffix_labels - 1].data() - host.data());
  return std::string(host.substr(offset));
}

// Corporate-looking domains become the affiliation; free-mail and malformed
// addresses are "unknown". Malformed input appends to `warnings` if given.
inline std::string infer_affiliation(std::string_view email, const std::set<std::string>& public_domains,
                                     std::vector<std::string>* warnings = nullptr) {
  const auto at = email.find('@');
  const bool malformed = at == std::string_view::npos || at == 0 || email.find('@', at + 1) != std::string_view::npos ||
                         at + 1 >= email.size() || email.substr(at + 1).find('.') == std::string_view::npos ||
                         email.back() == '.';
  if (malformed) {
    if (warnings) warnings->push_back("malformed email '" + std::string(email) + "'");
    return std::string(kUnknown);
  }
  const auto domain = detail::lowercase(std::string(email.substr(at + 1)));
  const auto registrable = registrable_domain(domain);
  if (public_domains.count(domain) || public_domains.count(registrable)) return std::string(kUnknown);
  return registrable;
}

// Affiliation from the first corporate email in sorted order.
inline void assign_affiliations(Community& community, const std::set<std::string>& public_domains,
                                std::vector<std::string>* warnings = nullptr) {
  for (auto& c : community.contributors) {
    c.affiliation = std::string(kUnknown);
    for (const auto& email : c.emails) {
      auto a = infer_affiliation(email, public_domains, warnings);
      if (a != kUnknown) {
        c.affiliation = std::move(a);
        break;
      }
    }
  }
}

}  // namespace retain
