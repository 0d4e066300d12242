#include "clozerank/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "clozerank/error.hpp"

namespace clozerank {

void TransportProblem::validate() const {
  const auto m = supply.size();
  const auto n = demand.size();
  if (m == 0 || n == 0)
    raise(Errc::infeasible_mass, "empty supply or demand");
  if (cost.rows() != m || cost.cols() != n)
    throw std::invalid_argument("cost matrix shape does not match masses");
  if ((supply.array() < 0).any() || (demand.array() < 0).any())
    throw std::invalid_argument("negative mass");
  if (!cost.allFinite() || (cost.array() < 0).any())
    throw std::invalid_argument("costs must be finite and non-negative");
  const double sa = supply.sum();
  const double sb = demand.sum();
  if (std::abs(sa - 1.0) > 1e-6 || std::abs(sb - 1.0) > 1e-6)
    raise(Errc::infeasible_mass, "masses must each total 1 within 1e-6");
}

namespace {

// Basic cell of the transportation tableau. The basis always holds exactly
// m+n-1 cells forming a spanning tree over row nodes [0,m) and column nodes
// [m, m+n).
struct BasicCell {
  int i, j;
  double flow;
};

struct SimplexState {
  int m, n;
  const Mat& cost;
  std::vector<BasicCell> basis;
  std::vector<std::vector<int>> adj;  // node -> indices into basis
  std::vector<double> u, v;           // row / column duals

  explicit SimplexState(const Mat& c) : m((int)c.rows()), n((int)c.cols()), cost(c) {}

  void rebuild_adjacency() {
    adj.assign(m + n, {});
    for (int k = 0; k < (int)basis.size(); ++k) {
      adj[basis[k].i].push_back(k);
      adj[m + basis[k].j].push_back(k);
    }
  }

  // Duals from u[0] = 0 by walking the basis tree.
  void compute_duals() {
    u.assign(m, 0.0);
    v.assign(n, 0.0);
    std::vector<char> seen(m + n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      for (int k : adj[node]) {
        const BasicCell& c = basis[k];
        int other = (node == c.i) ? m + c.j : c.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= m)
          v[other - m] = cost(c.i, c.j) - u[c.i];
        else
          u[other] = cost(c.i, c.j) - v[node - m];
        stack.push_back(other);
      }
    }
  }

  // Tree path from row node i to column node m+j as a sequence of basis
  // indices. Returns empty only if the basis is not a spanning tree.
  std::vector<int> tree_path(int i, int j) const {
    const int target = m + j;
    std::vector<int> parent_edge(m + n, -1), parent_node(m + n, -1);
    std::vector<char> seen(m + n, 0);
    std::vector<int> stack{i};
    seen[i] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      if (node == target) break;
      for (int k : adj[node]) {
        const BasicCell& c = basis[k];
        int other = (node == c.i) ? m + c.j : c.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_edge[other] = k;
        parent_node[other] = node;
        stack.push_back(other);
      }
    }
    std::vector<int> path;
    for (int node = target; node != i; node = parent_node[node])
      path.push_back(parent_edge[node]);
    std::reverse(path.begin(), path.end());
    return path;  // edges from i towards m+j
  }
};

// Northwest-corner start: exactly m+n-1 basic cells, zero-flow cells kept
// for degenerate steps.
std::vector<BasicCell> northwest_corner(const Vec& a, const Vec& b) {
  const int m = (int)a.size(), n = (int)b.size();
  std::vector<double> ra(a.data(), a.data() + m), rb(b.data(), b.data() + n);
  std::vector<BasicCell> basis;
  basis.reserve(m + n - 1);
  int i = 0, j = 0;
  while (true) {
    const double f = std::min(ra[i], rb[j]);
    basis.push_back({i, j, f});
    ra[i] -= f;
    rb[j] -= f;
    if (i == m - 1 && j == n - 1) break;
    if (ra[i] <= rb[j] && i < m - 1)
      ++i;
    else if (j < n - 1)
      ++j;
    else
      ++i;
  }
  return basis;
}

}  // namespace

TransportPlan solve_emd(const TransportProblem& problem) {
  problem.validate();
  const int m = (int)problem.supply.size();
  const int n = (int)problem.demand.size();

  // Normalize to an exactly balanced instance.
  Vec a = problem.supply / problem.supply.sum();
  Vec b = problem.demand / problem.demand.sum();

  SimplexState st(problem.cost);
  st.basis = northwest_corner(a, b);

  std::vector<char> in_basis(m * n, 0);
  for (const auto& c : st.basis) in_basis[c.i * n + c.j] = 1;

  const double tol = 1e-12 * (1.0 + problem.cost.maxCoeff());
  bool bland = false;
  long degenerate_streak = 0;
  const long max_pivots = 200L * m * n + 10000;

  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots)
      throw std::logic_error("transportation simplex failed to converge");

    st.rebuild_adjacency();
    st.compute_duals();

    // Entering cell: most negative reduced cost (Dantzig), or the first one
    // in lexicographic order once Bland's rule is engaged.
    int ei = -1, ej = -1;
    double best = -tol;
    for (int i = 0; i < m && !(bland && ei >= 0); ++i) {
      for (int j = 0; j < n; ++j) {
        if (in_basis[i * n + j]) continue;
        const double rc = st.cost(i, j) - st.u[i] - st.v[j];
        if (rc < best) {
          best = rc;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    }
    if (ei < 0) break;  // optimal

    // Cycle = entering cell + tree path from its row to its column.
    // Walking the path from the row end, odd edges shed flow.
    const std::vector<int> path = st.tree_path(ei, ej);
    double delta = std::numeric_limits<double>::infinity();
    int leave_pos = -1;
    for (size_t t = 0; t < path.size(); t += 2) {  // even positions shed flow
      const BasicCell& c = st.basis[path[t]];
      const bool better =
          leave_pos < 0 || c.flow < delta ||
          (c.flow == delta &&
           std::pair(c.i, c.j) < std::pair(st.basis[path[leave_pos]].i,
                                           st.basis[path[leave_pos]].j));
      if (better) {
        delta = c.flow;
        leave_pos = (int)t;
      }
    }
    if (leave_pos < 0)
      throw std::logic_error("transportation simplex: no leaving arc");

    for (size_t t = 0; t < path.size(); ++t) {
      BasicCell& c = st.basis[path[t]];
      c.flow += (t % 2 == 0) ? -delta : delta;
      if (c.flow < 0) c.flow = 0;
    }

    BasicCell& leaving = st.basis[path[leave_pos]];
    in_basis[leaving.i * n + leaving.j] = 0;
    in_basis[ei * n + ej] = 1;
    leaving = {ei, ej, delta};

    if (delta <= 1e-18) {
      if (++degenerate_streak > (long)m * n + 16) bland = true;
    } else {
      degenerate_streak = 0;
    }
  }

  TransportPlan plan;
  plan.flow = Mat::Zero(m, n);
  for (const auto& c : st.basis) plan.flow(c.i, c.j) = c.flow;
  plan.objective = (plan.flow.array() * problem.cost.array()).sum();
  return plan;
}

double relaxed_wmd(const TransportProblem& problem) {
  problem.validate();
  const Vec a = problem.supply / problem.supply.sum();
  const Vec b = problem.demand / problem.demand.sum();
  const double lo_rows = a.dot(problem.cost.rowwise().minCoeff());
  const double lo_cols = b.dot(problem.cost.colwise().minCoeff().transpose());
  return std::max(lo_rows, lo_cols);
}

}  // namespace clozerank
