#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "retain/core/lifecycle.hpp"
#include "retain/core/types.hpp"
#include "retain/hash.hpp"

namespace retain {

// Operator assertion that `alias` belongs to the same person as `canonical`.
struct MergeHint {
  std::string alias;
  std::string canonical;
};

// Resolved identities for one project, sorted by contributor_id.
struct Community {
  std::vector<Contributor> contributors;
  std::map<std::string, std::string> id_of_key;
  LifecyclePolicy policy;  // as_of always resolved

  const Contributor* find(const std::string& contributor_id) const {
    auto it = std::lower_bound(contributors.begin(), contributors.end(), contributor_id,
                               [](const Contributor& c, const std::string& id) { return c.contributor_id < id; });
    return it != contributors.end() && it->contributor_id == contributor_id ? &*it : nullptr;
  }
  Contributor* find(const std::string& contributor_id) {
    return const_cast<Contributor*>(std::as_const(*this).find(contributor_id));
  }
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline std::string lowercase(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

inline bool looks_like_email(const std::string& key) {
  return std::count(key.begin(), key.end(), '@') == 1 && key.front() != '@' && key.back() != '@';
}

}  // namespace detail

inline std::string contributor_id_for(const std::string& smallest_key) {
  return stable_id("c", smallest_key);
}

// Collapses raw author keys into identities: keys sharing an email (or whose
// key is itself that email) merge, as do keys joined by hints. Statuses are
// classified at the resolved as_of.
inline Community resolve_identities(std::span<const ContributionEvent> events,
                                    std::span<const MergeHint> hints = {},
                                    const LifecyclePolicy& policy = {}) {
  Community out;
  out.policy = resolve_policy(policy, events);

  std::map<std::string, std::size_t> key_index;
  for (const auto& e : events) key_index.emplace(e.contributor_key, 0);
  std::vector<std::string> keys;
  keys.reserve(key_index.size());
  for (auto& [k, idx] : key_index) {
    idx = keys.size();
    keys.push_back(k);
  }

  std::map<std::string, std::set<std::string>> emails_of_key;
  for (const auto& e : events) {
    if (e.email && !e.email->empty()) emails_of_key[e.contributor_key].insert(detail::lowercase(*e.email));
    if (detail::looks_like_email(e.contributor_key)) {
      emails_of_key[e.contributor_key].insert(detail::lowercase(e.contributor_key));
    }
  }

  auto email_links = [&](detail::DisjointSets& sets) {
    std::map<std::string, std::size_t> owner;
    for (const auto& [key, emails] : emails_of_key) {
      for (const auto& email : emails) {
        auto [it, inserted] = owner.emplace(email, key_index.at(key));
        if (!inserted) sets.unite(it->second, key_index.at(key));
      }
    }
  };

  std::vector<MergeHint> usable;
  for (const auto& h : hints) {
    if (key_index.count(h.alias) && key_index.count(h.canonical)) usable.push_back(h);
  }

  // An alias hinted toward two targets is contradictory unless the targets
  // are already one identity through the remaining evidence.
  std::map<std::string, std::set<std::string>> targets;
  for (const auto& h : usable) targets[h.alias].insert(h.canonical);
  for (const auto& [alias, tset] : targets) {
    if (tset.size() < 2) continue;
    detail::DisjointSets sets(keys.size());
    email_links(sets);
    for (const auto& h : usable) {
      if (h.alias != alias) sets.unite(key_index.at(h.alias), key_index.at(h.canonical));
    }
    const auto& first = *tset.begin();
    for (const auto& other : tset) {
      if (sets.find(key_index.at(first)) != sets.find(key_index.at(other))) {
        fail(ErrorKind::conflict, "contradictory merge hints: '" + alias + "' hinted into both '" + first +
                                      "' and '" + other + "'");
      }
    }
  }

  detail::DisjointSets sets(keys.size());
  email_links(sets);
  for (const auto& h : usable) sets.unite(key_index.at(h.alias), key_index.at(h.canonical));

  // Roots are the smallest key index in each component, i.e. the smallest key.
  std::map<std::size_t, Contributor> by_root;
  std::map<std::size_t, std::tuple<Timestamp, std::string>> name_rank;
  for (const auto& e : events) {
    const auto root = sets.find(key_index.at(e.contributor_key));
    auto [it, inserted] = by_root.try_emplace(root);
    Contributor& c = it->second;
    if (inserted) {
      c.contributor_id = contributor_id_for(keys[root]);
      c.display_name = keys[root];
      c.first_event = e.timestamp;
      c.last_event = e.timestamp;
    }
    c.aliases.insert(e.contributor_key);
    c.first_event = std::min(c.first_event, e.timestamp);
    c.last_event = std::max(c.last_event, e.timestamp);
    if (auto ke = emails_of_key.find(e.contributor_key); ke != emails_of_key.end()) {
      c.emails.insert(ke->second.begin(), ke->second.end());
    }
    if (e.display_name && !e.display_name->empty()) {
      auto rank = std::make_tuple(e.timestamp, e.event_id);
      auto [nit, fresh] = name_rank.try_emplace(root, rank);
      if (fresh || rank > nit->second) {
        nit->second = rank;
        c.display_name = *e.display_name;
      }
    }
  }

  for (auto& [root, c] : by_root) {
    for (const auto& alias : c.aliases) out.id_of_key[alias] = c.contributor_id;
    c.status = classify_status(c, out.policy);
    out.contributors.push_back(std::move(c));
  }
  std::sort(out.contributors.begin(), out.contributors.end(),
            [](const Contributor& a, const Contributor& b) { return a.contributor_id < b.contributor_id; });
  return out;
}

// Events regrouped per contributor_id, each list sorted ascending by time.
inline std::map<std::string, std::vector<ContributionEvent>> events_by_contributor(
    std::span<const ContributionEvent> events, const Community& community) {
  std::map<std::string, std::vector<ContributionEvent>> out;
  for (const auto& c : community.contributors) out[c.contributor_id];
  for (const auto& e : events) {
    auto it = community.id_of_key.find(e.contributor_key);
    if (it != community.id_of_key.end()) out[it->second].push_back(e);
  }
  for (auto& [id, list] : out) {
    std::stable_sort(list.begin(), list.end(), [](const ContributionEvent& a, const ContributionEvent& b) {
      return std::tie(a.timestamp, a.event_id) < std::tie(b.timestamp, b.event_id);
    });
  }
  return out;
}

inline bool is_bot_key(const std::string& key) { return key.find("[bot]") != std::string::npos; }

inline std::vector<ContributionEvent> without_bots(std::span<const ContributionEvent> events) {
  std::vector<ContributionEvent> out;
  for (const auto& e : events) {
    if (!is_bot_key(e.contributor_key)) out.push_back(e);
  }
  return out;
}

}  // namespace retain
