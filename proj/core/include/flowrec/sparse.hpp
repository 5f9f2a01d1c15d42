#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace flowrec {

using Vector = Eigen::VectorXd;

/// Row-compressed 0/1 pattern. Used for the incidence blocks, which carry no values.
struct CsrPattern {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;

  std::size_t nnz() const noexcept { return col_idx.size(); }

  std::span<const std::size_t> row(std::size_t r) const noexcept {
    return {col_idx.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }
};

/// Row-compressed real matrix.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }

  Vector multiply(const Vector& x) const;
  Eigen::MatrixXd to_dense() const;

  /// Builds a matrix from (row, col, value) triplets; duplicates are summed.
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::vector<Triplet> triplets);
  static CsrMatrix from_dense(const Eigen::MatrixXd& dense, double drop = 0.0);
};

namespace numerics {

/// Symmetric positive-definite sparse matrix. Construction checks symmetry;
/// definiteness is established by the solver.
class SparseSpd {
 public:
  explicit SparseSpd(CsrMatrix matrix);

  std::size_t dimension() const noexcept { return matrix_.rows; }
  const CsrMatrix& matrix() const noexcept { return matrix_; }
  Vector multiply(const Vector& x) const { return matrix_.multiply(x); }

  /// Bytes held by the row-compressed storage.
  std::size_t storage_bytes() const noexcept;

 private:
  CsrMatrix matrix_;
};

struct SpdSolveOptions {
  double tol = 1e-12;
  /// 0 means 10 * dimension.
  std::size_t max_iterations = 0;
};

struct SpdSolveResult {
  Vector x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Matrix-free product x -> M x for a symmetric positive-definite M.
using LinearOperator = std::function<Vector(const Vector&)>;

/// Jacobi-preconditioned conjugate gradient on M x = rhs, with `diagonal` the
/// positive diagonal of M. Guarantees ||M x - rhs|| <= tol * ||rhs|| or throws
/// NoConvergence / NotPositiveDefinite.
SpdSolveResult solve_spd(const LinearOperator& m, const Vector& diagonal, const Vector& rhs,
                         SpdSolveOptions options = {});

SpdSolveResult solve_spd(const SparseSpd& m, const Vector& rhs,
                         SpdSolveOptions options = {});

}  // namespace numerics
}  // namespace flowrec
