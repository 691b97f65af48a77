#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace retain {

// Harrell's C. A pair is comparable when the shorter duration ended in an
// event; it is concordant when that subject carries the higher risk, and a
// risk tie counts one half. Absent when nothing is comparable.
// Sorting plus a Fenwick tree over risk ranks: O(n log n).
inline std::optional<double> concordance_index(std::span<const double> risk, std::span<const double> duration,
                                               std::span<const int> event) {
  const std::size_t n = risk.size();
  std::vector<double> ranks_sorted(risk.begin(), risk.end());
  std::sort(ranks_sorted.begin(), ranks_sorted.end());
  ranks_sorted.erase(std::unique(ranks_sorted.begin(), ranks_sorted.end()), ranks_sorted.end());
  auto rank_of = [&](double r) {
    return static_cast<std::size_t>(std::lower_bound(ranks_sorted.begin(), ranks_sorted.end(), r) - ranks_sorted.begin()) + 1;
  };

  std::vector<std::int64_t> tree(ranks_sorted.size() + 1, 0);
  auto add = [&](std::size_t pos) {
    for (; pos < tree.size(); pos += pos & (~pos + 1)) ++tree[pos];
  };
  auto prefix = [&](std::size_t pos) {
    std::int64_t s = 0;
    for (; pos > 0; pos -= pos & (~pos + 1)) s += tree[pos];
    return s;
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return duration[a] > duration[b]; });

  double concordant = 0.0;
  std::int64_t comparable = 0, inserted = 0;
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    while (end < n && duration[order[end]] == duration[order[k]]) ++end;
    // Everyone inserted so far outlived this block.
    for (std::size_t m = k; m < end; ++m) {
      const auto i = order[m];
      if (!event[i]) continue;
      const auto r = rank_of(risk[i]);
      const auto below = prefix(r - 1);
      const auto tied = prefix(r) - below;
      concordant += static_cast<double>(below) + 0.5 * static_cast<double>(tied);
      comparable += inserted;
    }
    for (std::size_t m = k; m < end; ++m) {
      add(rank_of(risk[order[m]]));
      ++inserted;
    }
    k = end;
  }
  if (comparable == 0) return std::nullopt;
  return concordant / static_cast<double>(comparable);
}

}  // namespace retain
