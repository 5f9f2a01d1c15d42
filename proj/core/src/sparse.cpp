#include "flowrec/sparse.hpp"

#include "flowrec/error.hpp"

#include <algorithm>
#include <cmath>

namespace flowrec {

Vector CsrMatrix::multiply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != cols) {
    throw Error(ErrorCode::DimensionMismatch, "CSR multiply: vector length mismatch");
  }
  Vector y(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      acc += values[k] * x[static_cast<Eigen::Index>(col_idx[k])];
    }
    y[static_cast<Eigen::Index>(r)] = acc;
  }
  return y;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_idx[k])) += values[k];
    }
  }
  return d;
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  m.col_idx.reserve(triplets.size());
  m.values.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const Triplet& t = triplets[i];
    if (t.row >= rows || t.col >= cols) {
      throw Error(ErrorCode::UnknownIndex, "triplet outside matrix bounds");
    }
    double v = 0.0;
    std::size_t j = i;
    while (j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col) {
      v += triplets[j].value;
      ++j;
    }
    m.col_idx.push_back(t.col);
    m.values.push_back(v);
    ++m.row_ptr[t.row + 1];
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

CsrMatrix CsrMatrix::from_dense(const Eigen::MatrixXd& dense, double drop) {
  std::vector<Triplet> t;
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      if (std::abs(dense(r, c)) > drop) {
        t.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), dense(r, c)});
      }
    }
  }
  return from_triplets(static_cast<std::size_t>(dense.rows()),
                       static_cast<std::size_t>(dense.cols()), std::move(t));
}

}  // namespace flowrec
