#pragma once

#include "clozerank/types.hpp"

namespace clozerank {

/// Balanced optimal-transport instance: both mass vectors sum to 1.
struct TransportProblem {
  Vec supply;  // length m, non-negative
  Vec demand;  // length n, non-negative
  Mat cost;    // m x n, finite, non-negative

  /// Throws Errc::infeasible_mass when either side deviates from total
  /// mass 1 by more than 1e-6, and std::invalid_argument for bad costs.
  void validate() const;
};

struct TransportPlan {
  Mat flow;          // m x n, non-negative
  double objective;  // sum_ij flow_ij * cost_ij
};

/// Exact minimum-cost plan, computed with the transportation simplex on the
/// complete bipartite graph. Masses are normalized to total exactly 1 before
/// solving (inputs off by more than 1e-6 are rejected by validate()).
TransportPlan solve_emd(const TransportProblem& problem);

/// Lower bound on solve_emd().objective obtained by dropping one marginal
/// constraint: max of the two one-sided relaxations.
double relaxed_wmd(const TransportProblem& problem);

}  // namespace clozerank
