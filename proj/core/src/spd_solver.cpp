#include "flowrec/error.hpp"
#include "flowrec/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace flowrec::numerics {

SparseSpd::SparseSpd(CsrMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows != matrix_.cols) {
    throw Error(ErrorCode::NotSpd, "matrix is not square");
  }
  // Symmetry within 1e-12 relative to the largest magnitude entry.
  double scale = 0.0;
  for (double v : matrix_.values) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1.0);
  for (std::size_t r = 0; r < matrix_.rows; ++r) {
    for (std::size_t k = matrix_.row_ptr[r]; k < matrix_.row_ptr[r + 1]; ++k) {
      const std::size_t c = matrix_.col_idx[k];
      const auto begin = matrix_.col_idx.begin() + static_cast<std::ptrdiff_t>(matrix_.row_ptr[c]);
      const auto end = matrix_.col_idx.begin() + static_cast<std::ptrdiff_t>(matrix_.row_ptr[c + 1]);
      const auto it = std::lower_bound(begin, end, r);
      const double mirror =
          (it != end && *it == r)
              ? matrix_.values[static_cast<std::size_t>(it - matrix_.col_idx.begin())]
              : 0.0;
      if (std::abs(mirror - matrix_.values[k]) > tol) {
        throw Error(ErrorCode::NotSpd, "matrix is not symmetric at (" + std::to_string(r) +
                                           ", " + std::to_string(c) + ")");
      }
    }
  }
}

std::size_t SparseSpd::storage_bytes() const noexcept {
  return matrix_.values.size() * sizeof(double) +
         matrix_.col_idx.size() * sizeof(std::size_t) +
         matrix_.row_ptr.size() * sizeof(std::size_t);
}

SpdSolveResult solve_spd(const LinearOperator& m, const Vector& diagonal, const Vector& rhs,
                         SpdSolveOptions options) {
  const auto dim = static_cast<std::size_t>(diagonal.size());
  if (static_cast<std::size_t>(rhs.size()) != dim) {
    throw Error(ErrorCode::DimensionMismatch, "rhs length does not match matrix dimension");
  }
  if (!(options.tol > 0.0)) throw Error(ErrorCode::BadParameter, "tolerance must be positive");
  if (!(diagonal.array() > 0.0).all()) {
    throw Error(ErrorCode::NotPositiveDefinite, "non-positive diagonal entry");
  }
  const std::size_t max_iter =
      options.max_iterations ? options.max_iterations : std::max<std::size_t>(10 * dim, 10);
  const Vector inv_diag = diagonal.cwiseInverse();

  SpdSolveResult out;
  out.x = Vector::Zero(static_cast<Eigen::Index>(dim));
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return out;
  const double target = options.tol * rhs_norm;

  Vector r = rhs;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector mp = m(p);
    const double curvature = p.dot(mp);
    if (!(curvature > 0.0)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "non-positive curvature at CG iteration " + std::to_string(it));
    }
    const double alpha = rz / curvature;
    out.x += alpha * p;
    r -= alpha * mp;
    out.iterations = it + 1;
    if (r.norm() <= target) {
      // Confirm with the true residual; the recurrence drifts in long runs.
      r = rhs - m(out.x);
      const double true_res = r.norm();
      if (true_res <= target) {
        out.relative_residual = true_res / rhs_norm;
        return out;
      }
      z = inv_diag.cwiseProduct(r);
      p = z;
      rz = r.dot(z);
      continue;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw Error(ErrorCode::NoConvergence,
              "conjugate gradient did not reach tolerance in " + std::to_string(max_iter) +
                  " iterations (relative residual " +
                  std::to_string((rhs - m(out.x)).norm() / rhs_norm) + ")");
}

SpdSolveResult solve_spd(const SparseSpd& m, const Vector& rhs, SpdSolveOptions options) {
  if (static_cast<std::size_t>(rhs.size()) != m.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "rhs length does not match matrix dimension");
  }
  const CsrMatrix& a = m.matrix();
  Vector diagonal = Vector::Zero(static_cast<Eigen::Index>(a.rows));
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      if (a.col_idx[k] == r) diagonal[static_cast<Eigen::Index>(r)] = a.values[k];
    }
  }
  if (!(diagonal.array() > 0.0).all()) {
    throw Error(ErrorCode::NotPositiveDefinite, "non-positive diagonal entry");
  }
  return solve_spd([&m](const Vector& x) { return m.multiply(x); }, diagonal, rhs, options);
}

}  // namespace flowrec::numerics
