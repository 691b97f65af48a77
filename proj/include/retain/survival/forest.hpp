#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <thread>
#include <vector>

#include "retain/random.hpp"
#include "retain/survival/logrank.hpp"
#include "retain/survival/nelson_aalen.hpp"
#include "retain/survival/step_function.hpp"

namespace retain {

struct ForestOptions {
  int trees = 100;
  int min_node_size = 3;
  // Features tried per node; 0 means ceil(sqrt(p)).
  int mtry = 0;
  bool bootstrap = true;
  // Cap on thresholds evaluated per feature (evenly spaced over the sorted
  // distinct values when there are more).
  int max_split_candidates = 32;
  // 0 means std::thread::hardware_concurrency().
  int threads = 0;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  StepFunction cumulative_hazard;  // leaves only

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct SurvivalTree {
  std::vector<TreeNode> nodes;  // root at 0

  const TreeNode& leaf_for(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int k = 0;
    while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(k)];
      k = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)];
  }

  bool operator==(const SurvivalTree&) const = default;
};

struct SurvivalForest {
  std::vector<SurvivalTree> trees;
  std::vector<double> event_times;  // distinct training event times

  // Ensemble cumulative hazard at t.
  double cumulative_hazard(const Eigen::Ref<const Eigen::RowVectorXd>& x, double t) const {
    double sum = 0.0;
    for (const auto& tree : trees) sum += tree.leaf_for(x).cumulative_hazard(t);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
  }

  // Ensemble mortality: cumulative hazard summed over the event-time grid.
  double risk_score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double total = 0.0;
    for (const auto& tree : trees) {
      const auto& chf = tree.leaf_for(x).cumulative_hazard;
      for (double t : event_times) total += chf(t);
    }
    return trees.empty() ? 0.0 : total / static_cast<double>(trees.size());
  }

  bool operator==(const SurvivalForest&) const = default;
};

namespace detail {

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& x, const Eigen::VectorXd& time, std::span<const int> event,
             const ForestOptions& options, std::uint64_t seed)
      : x_(x), time_(time), event_(event), options_(options), rng_(seed) {
    const auto p = static_cast<int>(x.cols());
    mtry_ = options.mtry > 0 ? std::min(options.mtry, p) : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  }

  SurvivalTree grow() {
    const auto n = static_cast<std::size_t>(x_.rows());
    std::vector<std::size_t> sample(n);
    if (options_.bootstrap) {
      for (auto& s : sample) s = rng_.below(n);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    // Time order is kept within every node so log-rank sweeps need no resort.
    std::stable_sort(sample.begin(), sample.end(), [&](std::size_t a, std::size_t b) { return time_[a] < time_[b]; });
    tree_.nodes.clear();
    tree_.nodes.emplace_back();
    split(0, std::move(sample));
    return std::move(tree_);
  }

 private:
  void make_leaf(int node, const std::vector<std::size_t>& members) {
    std::vector<double> t;
    std::vector<int> e;
    t.reserve(members.size());
    e.reserve(members.size());
    for (auto i : members) {
      t.push_back(time_[static_cast<Eigen::Index>(i)]);
      e.push_back(event_[i]);
    }
    tree_.nodes[static_cast<std::size_t>(node)].cumulative_hazard = nelson_aalen(t, e);
  }

  void split(int node, std::vector<std::size_t> members) {
    const auto min_size = static_cast<std::size_t>(std::max(1, options_.min_node_size));
    const bool any_event = std::any_of(members.begin(), members.end(), [&](std::size_t i) { return event_[i] != 0; });
    if (!any_event || members.size() < 2 * min_size) {
      make_leaf(node, members);
      return;
    }

    std::vector<int> features(static_cast<std::size_t>(x_.cols()));
    std::iota(features.begin(), features.end(), 0);
    for (int k = 0; k < mtry_; ++k) {  // partial Fisher-Yates
      const auto j = static_cast<std::size_t>(k) + rng_.below(features.size() - static_cast<std::size_t>(k));
      std::swap(features[static_cast<std::size_t>(k)], features[j]);
    }

    double best_stat = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> local(members.size());
    std::iota(local.begin(), local.end(), 0);
    for (int k = 0; k < mtry_; ++k) {
      const int f = features[static_cast<std::size_t>(k)];
      std::vector<double> values;
      values.reserve(members.size());
      for (auto i : members) values.push_back(x_(static_cast<Eigen::Index>(i), f));
      std::vector<double> distinct = values;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      if (distinct.size() < 2) continue;

      std::vector<double> thresholds;
      const std::size_t gaps = distinct.size() - 1;
      const auto cap = static_cast<std::size_t>(std::max(1, options_.max_split_candidates));
      const std::size_t count = std::min(gaps, cap);
      for (std::size_t c = 0; c < count; ++c) {
        const std::size_t g = gaps <= cap ? c : (c * gaps) / count;
        thresholds.push_back(0.5 * (distinct[g] + distinct[g + 1]));
      }

      for (double thr : thresholds) {
        std::size_t left = 0;
        for (double v : values) left += v <= thr;
        if (left < min_size || members.size() - left < min_size) continue;
        const auto parts = logrank_parts(
            std::span<const std::size_t>(local),
            [&](std::size_t i) { return time_[static_cast<Eigen::Index>(members[i])]; },
            [&](std::size_t i) { return event_[members[i]] != 0; }, [&](std::size_t i) { return values[i] <= thr; });
        const double stat = parts.chi_square();
        if (stat > best_stat) {
          best_stat = stat;
          best_feature = f;
          best_threshold = thr;
        }
      }
    }

    if (best_feature < 0) {
      make_leaf(node, members);
      return;
    }
    std::vector<std::size_t> left_members, right_members;
    for (auto i : members) {
      (x_(static_cast<Eigen::Index>(i), best_feature) <= best_threshold ? left_members : right_members).push_back(i);
    }
    const int left = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const int right = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    auto& n = tree_.nodes[static_cast<std::size_t>(node)];
    n.feature = best_feature;
    n.threshold = best_threshold;
    n.left = left;
    n.right = right;
    members.clear();
    members.shrink_to_fit();
    split(left, std::move(left_members));
    split(right, std::move(right_members));
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& time_;
  std::span<const int> event_;
  const ForestOptions& options_;
  Rng rng_;
  int mtry_ = 1;
  SurvivalTree tree_;
};

}  // namespace detail

// Random survival forest with log-rank splitting. Tree b draws all of its
// randomness from derive_seed(seed, b), so threaded and serial growth agree.
inline SurvivalForest grow_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& time, std::span<const int> event,
                                  const ForestOptions& options, std::uint64_t seed) {
  if (options.trees < 1) fail(ErrorKind::validation, "forest needs at least one tree");
  SurvivalForest forest;
  forest.trees.resize(static_cast<std::size_t>(options.trees));
  for (Eigen::Index i = 0; i < time.size(); ++i) {
    if (event[static_cast<std::size_t>(i)]) forest.event_times.push_back(time[i]);
  }
  std::sort(forest.event_times.begin(), forest.event_times.end());
  forest.event_times.erase(std::unique(forest.event_times.begin(), forest.event_times.end()), forest.event_times.end());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<std::size_t>(
      std::min<long>(options.threads > 0 ? options.threads : static_cast<long>(hw), options.trees));
  auto grow_range = [&](std::size_t worker) {
    for (std::size_t b = worker; b < forest.trees.size(); b += workers) {
      detail::TreeGrower grower(x, time, event, options, derive_seed(seed, b));
      forest.trees[b] = grower.grow();
    }
  };
  if (workers <= 1) {
    grow_range(0);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, grow_range, w));
    for (auto& j : jobs) j.get();
  }
  return forest;
}

}  // namespace retain
