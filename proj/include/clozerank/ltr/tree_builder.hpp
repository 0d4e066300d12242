#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "clozerank/ltr/model.hpp"
#include "clozerank/types.hpp"

namespace clozerank::ltr {

struct TreeBuildConfig {
  int max_leaves = 10;
  int min_samples_leaf = 1;
  double feature_fraction = 1.0;       // < 1 samples features per split
  std::mt19937_64* rng = nullptr;      // required when feature_fraction < 1
};

/// Greedy variance-reduction regression tree grown best-first until
/// max_leaves. Split selection follows the strict (gain desc, feature asc,
/// threshold asc) total order, so the result is independent of evaluation
/// order. `leaf_value` maps a leaf's row set to its output (mean target for
/// squared loss, the Newton step for lambda objectives).
RegressionTree build_regression_tree(
    const Mat& X, const Vec& target, const std::vector<int>& rows,
    const TreeBuildConfig& config,
    const std::function<double(const std::vector<int>&)>& leaf_value);

}  // namespace clozerank::ltr
