#pragma once

#include <cstddef>
#include <vector>

#include "wassbary/transport.hpp"

// Exact solvers behind optimal_coupling_discrete.
namespace wassbary::solvers {

// Minimum-cost perfect matching for a square cost matrix; entry i is the
// column matched to row i.
std::vector<int> hungarian(const Matrix& cost);

struct FlowSolution {
  std::vector<PlanEntry> plan;  // positive flows only
  double cost = 0.0;
  std::size_t pivots = 0;
};

// Transportation problem  min <C, P>  over P >= 0 with row sums `supply` and
// column sums `demand` (equal totals). Primal network simplex started from an
// all-artificial basis with symbolic big-M costs.
FlowSolution network_simplex(const Vector& supply, const Vector& demand, const Matrix& cost);

struct LpSolution {
  Vector x;
  double cost = 0.0;
};

// min c.x over A x = b, x >= 0, with b >= 0. Dense two-phase tableau simplex
// under Bland's rule; redundant rows are allowed. Throws a domain error if
// the problem is infeasible.
LpSolution simplex(const Matrix& a, const Vector& b, const Vector& c);

}  // namespace wassbary::solvers
