#pragma once

// Shared helpers for the test suites: independent brute-force oracles for
// the transport solver and small random-instance generators. Everything
// here is test-only and deliberately avoids the library's solver paths.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "clozerank/types.hpp"

namespace testsupport {

using clozerank::Mat;
using clozerank::Vec;

/// Exact EMD for uniform masses 1/n on both sides: the assignment problem,
/// solved by enumerating all n! permutations.
inline double assignment_emd(const Mat& cost) {
  const int n = (int)cost.rows();
  std::vector<int> perm((size_t)n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += cost(i, perm[(size_t)i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

/// Exact EMD for arbitrary balanced masses by enumerating every vertex of
/// the transportation polytope: each spanning tree of the complete
/// bipartite graph determines a unique flow; feasible ones are vertices
/// and the optimum is their minimum objective.
inline double tree_enumeration_emd(const Vec& a, const Vec& b, const Mat& cost) {
  const int m = (int)a.size(), n = (int)b.size();
  const int nodes = m + n;
  const int edges = m * n;
  const int pick = nodes - 1;

  std::vector<int> combo((size_t)pick);
  std::iota(combo.begin(), combo.end(), 0);
  double best = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const std::vector<int>& chosen) {
    // Connectivity check: a spanning subgraph with nodes-1 edges is a tree.
    std::vector<std::vector<std::pair<int, int>>> adj((size_t)nodes);
    for (int e : chosen) {
      const int i = e / n, j = e % n;
      adj[(size_t)i].push_back({m + j, e});
      adj[(size_t)(m + j)].push_back({i, e});
    }
    std::vector<char> seen((size_t)nodes, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (auto [w, _] : adj[(size_t)v])
        if (!seen[(size_t)w]) {
          seen[(size_t)w] = 1;
          ++reached;
          stack.push_back(w);
        }
    }
    if (reached != nodes) return;

    // Peel leaves; each leaf edge carries its node's remaining balance.
    std::vector<double> bal((size_t)nodes);
    for (int i = 0; i < m; ++i) bal[(size_t)i] = a(i);
    for (int j = 0; j < n; ++j) bal[(size_t)(m + j)] = b(j);
    std::vector<int> degree((size_t)nodes, 0);
    std::vector<char> used((size_t)edges, 0);
    for (int e : chosen) {
      ++degree[(size_t)(e / n)];
      ++degree[(size_t)(m + e % n)];
      used[(size_t)e] = 1;
    }
    std::vector<double> flow((size_t)edges, 0.0);
    std::vector<int> leaves;
    for (int v = 0; v < nodes; ++v)
      if (degree[(size_t)v] == 1) leaves.push_back(v);
    std::vector<char> removed((size_t)edges, 0);
    while (!leaves.empty()) {
      const int v = leaves.back();
      leaves.pop_back();
      int edge = -1, other = -1;
      for (auto [w, e] : adj[(size_t)v])
        if (used[(size_t)e] && !removed[(size_t)e]) {
          edge = e;
          other = w;
        }
      if (edge < 0) continue;
      flow[(size_t)edge] = bal[(size_t)v];
      bal[(size_t)v] = 0.0;
      bal[(size_t)other] -= flow[(size_t)edge];
      removed[(size_t)edge] = 1;
      if (--degree[(size_t)other] == 1) leaves.push_back(other);
      degree[(size_t)v] = 0;
    }

    double obj = 0.0;
    for (int e = 0; e < edges; ++e) {
      if (!used[(size_t)e]) continue;
      if (flow[(size_t)e] < -1e-12) return;  // infeasible vertex
      obj += std::max(0.0, flow[(size_t)e]) * cost(e / n, e % n);
    }
    best = std::min(best, obj);
  };

  while (true) {
    evaluate(combo);
    int k = pick - 1;
    while (k >= 0 && combo[(size_t)k] == edges - pick + k) --k;
    if (k < 0) break;
    ++combo[(size_t)k];
    for (int t = k + 1; t < pick; ++t) combo[(size_t)t] = combo[(size_t)t - 1] + 1;
  }
  return best;
}

/// Random balanced masses (exponential draws, normalized to sum 1).
inline Vec random_masses(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = expo(rng) + 1e-3;
  return v / v.sum();
}

/// Ground points in R^d with their Euclidean distance matrix: a metric
/// cost shared by distributions over the same support.
struct MetricGround {
  Mat points;  // d x k
  Mat dist;    // k x k
};

inline MetricGround random_ground(int k, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MetricGround g;
  g.points.resize(d, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < d; ++i) g.points(i, j) = gauss(rng);
  g.dist.resize(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      g.dist(i, j) = (g.points.col(i) - g.points.col(j)).norm();
  return g;
}

}  // namespace testsupport
