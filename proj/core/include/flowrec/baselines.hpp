#pragma once

#include "flowrec/network.hpp"
#include "flowrec/reconcile.hpp"
#include "flowrec/series.hpp"
#include "flowrec/sparse.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace flowrec {

/// Keeps the path forecasts and aggregates them: y = S yhat_P.
Vector reconcile_bottom_up(const Vector& yhat, const FlowAggregationMatrix& s);

struct MintResult {
  Vector y;
  /// Coherence of the returned vector; clamping may break it.
  CoherenceReport coherence;
  std::size_t clamped_components = 0;
  SolverStats stats;
};

/// Identity-weight MinT: the l2 projection, optionally followed by setting
/// negative components to zero. Throws SolveFailure.
MintResult reconcile_mint_ols(const Vector& yhat, const FlowAggregationMatrix& s, bool nonneg);

/// The l2 projection through dense normal equations (dense S^T S and Cholesky),
/// used as the dense comparison arm. Throws SolveFailure.
ReconciliationResult reconcile_l2_dense(const Vector& yhat, const FlowAggregationMatrix& s);

struct LevelMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t count = 0;
};

struct MethodOutput {
  std::string name;
  Vector y;
  double wall_seconds = 0.0;
  std::size_t aux_bytes = 0;
};

struct MethodMetrics {
  std::string name;
  LevelMetrics overall;
  LevelMetrics nodes;
  LevelMetrics edges;
  LevelMetrics paths;
  double wall_seconds = 0.0;
  std::size_t aux_bytes = 0;
};

struct MetricsReport {
  std::vector<MethodMetrics> methods;

  /// Throws BadParameter for an unknown name.
  const MethodMetrics& at(const std::string& name) const;
};

/// RMSE and MAE against truth, overall and per level. Throws DimensionMismatch.
MetricsReport evaluate(const std::vector<MethodOutput>& outputs, const Vector& truth,
                       const IndexMap& index);

}  // namespace flowrec
