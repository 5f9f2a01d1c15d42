#pragma once

#include "flowrec/sparse.hpp"

#include <cstddef>
#include <functional>

namespace flowrec::numerics {

/// Returns f(x) and, when `grad` is non-null, writes the gradient into it.
using SmoothObjective = std::function<double(const Vector& x, Vector* grad)>;

struct DescentOptions {
  /// Stop when the (projected) gradient norm is <= tol * (1 + |f(x)|).
  double tol = 1e-8;
  std::size_t max_iterations = 10000;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  /// Optional box; empty vectors mean unbounded. Infinite entries are allowed.
  Vector lower;
  Vector upper;
};

struct DescentResult {
  Vector x;
  double value = 0.0;
  /// Norm of the gradient, or of the projected-gradient step x - P(x - g) under a box.
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

/// L-BFGS with Armijo backtracking; with a box, projected gradient descent with
/// a Barzilai-Borwein trial step. Accepted steps satisfy the Armijo
/// condition, or its slope form once value differences reach rounding level.
/// Throws NoConvergence when the iteration cap is hit or the line search stalls
/// above tolerance.
DescentResult minimize_smooth_convex(const SmoothObjective& f, Vector x0,
                                     const DescentOptions& options = {});

}  // namespace flowrec::numerics
