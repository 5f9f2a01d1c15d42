#pragma once

#include "flowrec/lp.hpp"
#include "flowrec/network.hpp"
#include "flowrec/series.hpp"
#include "flowrec/sparse.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowrec {

enum class LossKind { L2, L1, Huber, Custom };

/// Per-component loss f(|u|) summed with optional weights:
/// l2: u^2, l1: |u|, huber: u^2/2 inside delta and delta*|u| - delta^2/2 outside.
struct LossSpec {
  LossKind kind = LossKind::L2;
  double delta = 1.0;
  /// Custom f and f' on u >= 0; used only when kind == Custom.
  std::function<double(double)> f;
  std::function<double(double)> df;
  /// Empty means all ones; otherwise length n, entries >= 0.
  Vector weights;

  static LossSpec l2() { return {}; }
  static LossSpec l1();
  static LossSpec huber(double delta);
  static LossSpec custom(std::function<double(double)> f, std::function<double(double)> df);

  /// Throws BadParameter (delta <= 0, negative or non-finite weights, missing custom
  /// functions) or DimensionMismatch.
  void validate(std::size_t n) const;
  bool smooth() const;
  double weight(std::size_t i) const {
    return weights.size() ? weights[static_cast<Eigen::Index>(i)] : 1.0;
  }
  /// f(|u|) and d/du f(|u|).
  double value(double u) const;
  double derivative(double u) const;
};

/// Parses "l2", "l1" or "huber:<delta>".
std::optional<LossSpec> parse_loss(std::string_view text);
std::string describe(const LossSpec& loss);

/// Sum_i w_i f(|ytilde_i - yhat_i|).
double loss_value(const LossSpec& loss, const Vector& yhat, const Vector& ytilde);

/// Componentwise bounds on the reconciled vector; +-inf entries mean unbounded.
struct BoxConstraints {
  Vector lower;
  Vector upper;

  static BoxConstraints unbounded(std::size_t n);
  /// Throws DimensionMismatch or BadParameter (lower > upper, NaN).
  void validate(std::size_t n) const;
};

struct SolverStats {
  std::string method;
  std::size_t iterations = 0;
  double wall_seconds = 0.0;
  /// Bytes of auxiliary buffers the solver allocated (matrices and work vectors).
  std::size_t aux_bytes = 0;
};

struct ReconciliationResult {
  Vector y_tilde;
  Vector b_tilde;
  double loss_value = 0.0;
  CoherenceReport coherence;
  SolverStats stats;
  /// Optimality certificate: max |S^T (yhat - ytilde)| for l2, LP duality gap for
  /// l1, final gradient norm for general losses.
  std::string certificate_kind;
  double certificate = 0.0;
  /// Global indices of nodes and edges that lie on no path (reconciled to 0).
  std::vector<std::size_t> uncovered;
};

struct L2Options {
  /// Relative residual target for the conjugate-gradient solve.
  double tol = 1e-12;
};

/// Orthogonal projection of yhat onto range(S) via S^T W S b = S^T W yhat.
/// `weights` (optional, length n, >= 0) gives the weighted variant.
/// Throws DimensionMismatch, NonFinite or SolveFailure.
ReconciliationResult reconcile_l2(const Vector& yhat, const FlowAggregationMatrix& s,
                                  const Vector& weights = {}, L2Options options = {});

/// A = [I | -[V'; E']] acting on [y_V; y_E; y_P]; A y = 0 iff y is coherent.
Eigen::MatrixXd coherence_constraints(const FlowAggregationMatrix& s);

/// ytilde = yhat - W^-1 A^T (A W^-1 A^T)^-1 (A yhat - c), dense.
/// Throws NotSpd, RankDeficient, DimensionMismatch, or BadParameter if a box is given.
Vector reconcile_weighted(const Vector& yhat, const Eigen::MatrixXd& a, const Vector& c,
                          const Eigen::MatrixXd& w,
                          const std::optional<BoxConstraints>& box = std::nullopt);

/// Weighted l1 reconciliation as an LP in (b, s): min w^T s subject to
/// s >= S b - yhat, s >= yhat - S b and lower <= S b <= upper.
/// Throws Infeasible (box only), SolveFailure.
ReconciliationResult reconcile_l1(const Vector& yhat, const FlowAggregationMatrix& s,
                                  const std::optional<BoxConstraints>& box = std::nullopt,
                                  const Vector& weights = {},
                                  numerics::LpOptions lp_options = {});

struct GeneralOptions {
  double tol = 1e-8;
  std::size_t max_iterations = 10000;
  /// Box on the reconciled vector. Only path-level bounds are supported for
  /// smooth losses; finite node or edge bounds raise BadParameter.
  std::optional<BoxConstraints> box;
  /// Starting path values; defaults to the l2 solution.
  std::optional<Vector> start;
};

/// Minimizes sum_i w_i f(|(S b)_i - yhat_i|) by gradient descent.
/// Throws NonSmoothLoss for l1 or a custom f with f'(0) != 0, NoConvergence.
ReconciliationResult reconcile_general(const Vector& yhat, const FlowAggregationMatrix& s,
                                       const LossSpec& loss, GeneralOptions options = {});

/// Dispatches on loss.kind: l2 (unboxed) to reconcile_l2, l1 to reconcile_l1,
/// everything else to reconcile_general.
ReconciliationResult reconcile(const Vector& yhat, const FlowAggregationMatrix& s,
                               const LossSpec& loss,
                               const std::optional<BoxConstraints>& box = std::nullopt);

}  // namespace flowrec
