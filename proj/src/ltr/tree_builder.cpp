#include "clozerank/ltr/tree_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace clozerank::ltr {

namespace {

constexpr double kMinGain = 1e-12;

struct Split {
  double gain = -1.0;
  int feature = -1;
  double threshold = 0.0;

  bool beats(const Split& o) const {
    if (gain != o.gain) return gain > o.gain;
    if (feature != o.feature) return feature < o.feature;
    return threshold < o.threshold;
  }
};

struct Pending {
  std::vector<int> rows;
  Split split;
  int node_index;  // position in the tree's node array
  int created;     // creation order, for deterministic pop order
};

std::vector<int> feature_subset(int total, const TreeBuildConfig& cfg) {
  std::vector<int> all(total);
  std::iota(all.begin(), all.end(), 0);
  if (cfg.feature_fraction >= 1.0 || !cfg.rng) return all;
  const int k = std::max(1, (int)std::ceil(cfg.feature_fraction * total));
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(all[i], all[pick(*cfg.rng)]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

Split best_split(const Mat& X, const Vec& target, const std::vector<int>& rows,
                 const TreeBuildConfig& cfg) {
  Split best;
  const int n = (int)rows.size();
  if (n < 2 * cfg.min_samples_leaf) return best;

  double total = 0.0;
  for (int r : rows) total += target(r);

  std::vector<std::pair<double, int>> order(rows.size());
  for (int f : feature_subset((int)X.cols(), cfg)) {
    for (size_t i = 0; i < rows.size(); ++i)
      order[i] = {X(rows[i], f), rows[i]};
    std::sort(order.begin(), order.end());

    double left_sum = 0.0;
    for (int k = 1; k < n; ++k) {
      left_sum += target(order[(size_t)k - 1].second);
      if (order[(size_t)k - 1].first == order[(size_t)k].first) continue;
      if (k < cfg.min_samples_leaf || n - k < cfg.min_samples_leaf) continue;
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / k +
                          right_sum * right_sum / (n - k) - total * total / n;
      Split cand{gain, f,
                 0.5 * (order[(size_t)k - 1].first + order[(size_t)k].first)};
      if (cand.gain > kMinGain && cand.beats(best)) best = cand;
    }
  }
  return best;
}

}  // namespace

RegressionTree build_regression_tree(
    const Mat& X, const Vec& target, const std::vector<int>& rows,
    const TreeBuildConfig& config,
    const std::function<double(const std::vector<int>&)>& leaf_value) {
  RegressionTree tree;
  tree.nodes.push_back({});  // root, provisionally a leaf
  std::vector<Pending> pending;
  pending.push_back({rows, best_split(X, target, rows, config), 0, 0});
  int leaves = 1;
  int created = 0;

  while (leaves < config.max_leaves) {
    // Deterministic pop: best gain, then earliest creation.
    int pick = -1;
    for (int i = 0; i < (int)pending.size(); ++i) {
      if (pending[(size_t)i].split.feature < 0) continue;
      if (pick < 0 || pending[(size_t)i].split.beats(pending[(size_t)pick].split) ||
          (!pending[(size_t)pick].split.beats(pending[(size_t)i].split) &&
           pending[(size_t)i].created < pending[(size_t)pick].created))
        pick = i;
    }
    if (pick < 0) break;  // nothing splittable left (DegenerateSplit -> leaf)

    Pending node = std::move(pending[(size_t)pick]);
    pending.erase(pending.begin() + pick);

    std::vector<int> left, right;
    for (int r : node.rows) {
      if (X(r, node.split.feature) <= node.split.threshold)
        left.push_back(r);
      else
        right.push_back(r);
    }

    auto& arr = tree.nodes;
    arr[(size_t)node.node_index].feature = node.split.feature;
    arr[(size_t)node.node_index].threshold = node.split.threshold;
    arr[(size_t)node.node_index].left = (int)arr.size();
    arr.push_back({});
    arr[(size_t)node.node_index].right = (int)arr.size();
    arr.push_back({});

    pending.push_back({std::move(left), {}, arr[(size_t)node.node_index].left,
                       ++created});
    pending.back().split =
        best_split(X, target, pending.back().rows, config);
    pending.push_back({std::move(right), {}, arr[(size_t)node.node_index].right,
                       ++created});
    pending.back().split =
        best_split(X, target, pending.back().rows, config);
    ++leaves;
  }

  for (const auto& p : pending)
    tree.nodes[(size_t)p.node_index].value = leaf_value(p.rows);
  return tree;
}

}  // namespace clozerank::ltr
