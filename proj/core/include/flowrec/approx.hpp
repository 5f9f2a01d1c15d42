#pragma once

#include "flowrec/network.hpp"
#include "flowrec/sparse.hpp"

#include <cstddef>
#include <optional>

namespace flowrec {

struct RelaxedOptions {
  /// Stop when a full Newton step keeps the set of saturated edges, or the
  /// gradient norm falls below tol * (1 + ||yhat||).
  double tol = 1e-10;
  std::size_t max_iterations = 200;
  /// Exact reconciliation to measure the deviation against.
  std::optional<Vector> exact;
};

struct RelaxedResult {
  Vector y_eps;
  Vector b;
  /// |sum_{P on e} y_P - y_e| per edge.
  Vector edge_violations;
  double max_violation = 0.0;
  double objective = 0.0;
  /// ||y_eps - exact||_2, when an exact solution was supplied.
  std::optional<double> deviation;
  std::size_t iterations = 0;
  double epsilon = 0.0;
  double wall_seconds = 0.0;
};

/// Minimizes ||y - yhat||^2 subject to y_V = V' b, y_P = b and
/// |E' b - y_E| <= epsilon per edge. Node totals stay exact. The edge slack is
/// eliminated in closed form and the remaining piecewise-quadratic problem in b
/// is solved by semismooth Newton with backtracking.
/// Throws BadParameter (epsilon <= 0), DimensionMismatch, NoConvergence.
RelaxedResult reconcile_relaxed(const Vector& yhat, const FlowAggregationMatrix& s,
                                double epsilon, RelaxedOptions options = {});

}  // namespace flowrec
