#pragma once

#include "flowrec/sparse.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <vector>

namespace flowrec::numerics {

enum class Relation { LessEqual, Equal, GreaterEqual };

/// minimize c^T x  subject to  A x (rel) rhs,  x >= lower.
/// A lower bound of -infinity makes the variable free.
struct LpProblem {
  Vector objective;
  Eigen::MatrixXd constraints;
  std::vector<Relation> relations;
  Vector rhs;
  Vector lower;

  std::size_t num_variables() const noexcept { return static_cast<std::size_t>(objective.size()); }
  std::size_t num_constraints() const noexcept { return relations.size(); }
  void validate() const;
};

enum class PivotRule {
  /// Smallest-index entering and leaving variables throughout.
  Bland,
  /// Most negative reduced cost; switches to Bland's rule for good after a
  /// run of degenerate pivots.
  DantzigThenBland,
};

struct LpOptions {
  PivotRule rule = PivotRule::DantzigThenBland;
  std::size_t degenerate_run_before_bland = 50;
  /// 0 means 50 * (rows + columns) of the standard form.
  std::size_t max_pivots = 0;
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-10;
};

struct LpSolution {
  Vector x;
  double objective = 0.0;
  /// Dual objective evaluated from the final basis; equals `objective` at optimality.
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  /// Most negative reduced cost under the final duals (>= -tol when dual feasible).
  double min_reduced_cost = 0.0;
  std::size_t pivots = 0;
  std::size_t tableau_bytes = 0;
};

/// Two-phase dense tableau primal simplex. Throws Infeasible, Unbounded or
/// CyclingDetected (pivot cap reached).
LpSolution solve_lp(const LpProblem& problem, LpOptions options = {});

}  // namespace flowrec::numerics
