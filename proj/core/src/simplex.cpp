#include "flowrec/error.hpp"
#include "flowrec/lp.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowrec::numerics {

void LpProblem::validate() const {
  const auto n = objective.size();
  const auto m = static_cast<Eigen::Index>(relations.size());
  if (constraints.rows() != m || constraints.cols() != n || rhs.size() != m ||
      lower.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "LP dimensions are inconsistent");
  }
  if (!objective.allFinite() || !constraints.allFinite() || !rhs.allFinite()) {
    throw Error(ErrorCode::NonFinite, "LP data contains non-finite entries");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || lower[j] == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::BadParameter, "invalid lower bound on variable " + std::to_string(j));
    }
  }
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Standard form: min c^T z + offset, A z = b, z >= 0, b >= 0.
struct StandardForm {
  RowMatrix a;
  Vector b;
  Vector c;
  double offset = 0.0;
  // Column of z that starts basic in each row, or kNone if an artificial is needed.
  std::vector<std::size_t> identity_col;
  // Map back: x_j = lower_j + z[pos] or z[pos] - z[neg].
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
};

StandardForm to_standard_form(const LpProblem& p) {
  const auto n = static_cast<std::size_t>(p.objective.size());
  const auto m = p.relations.size();
  StandardForm sf;
  sf.pos.resize(n);
  sf.neg.assign(n, kNone);
  std::size_t cols = 0;
  for (std::size_t j = 0; j < n; ++j) {
    sf.pos[j] = cols++;
    if (std::isinf(p.lower[static_cast<Eigen::Index>(j)])) sf.neg[j] = cols++;
  }
  std::vector<std::size_t> slack(m, kNone);
  for (std::size_t i = 0; i < m; ++i) {
    if (p.relations[i] != Relation::Equal) slack[i] = cols++;
  }
  sf.a = RowMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(cols));
  sf.b = p.rhs;
  sf.c = Vector::Zero(static_cast<Eigen::Index>(cols));
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double lj = p.lower[jj];
    sf.c[static_cast<Eigen::Index>(sf.pos[j])] = p.objective[jj];
    if (sf.neg[j] != kNone) {
      sf.c[static_cast<Eigen::Index>(sf.neg[j])] = -p.objective[jj];
    } else if (lj != 0.0) {
      sf.offset += p.objective[jj] * lj;
      sf.b -= p.constraints.col(jj) * lj;
    }
  }
  sf.identity_col.assign(m, kNone);
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p.constraints(ii, static_cast<Eigen::Index>(j));
      if (v == 0.0) continue;
      sf.a(ii, static_cast<Eigen::Index>(sf.pos[j])) = v;
      if (sf.neg[j] != kNone) sf.a(ii, static_cast<Eigen::Index>(sf.neg[j])) = -v;
    }
    double slack_coef = 0.0;
    if (p.relations[i] == Relation::LessEqual) slack_coef = 1.0;
    if (p.relations[i] == Relation::GreaterEqual) slack_coef = -1.0;
    if (slack[i] != kNone) sf.a(ii, static_cast<Eigen::Index>(slack[i])) = slack_coef;
    if (sf.b[ii] < 0.0) {
      sf.a.row(ii) *= -1.0;
      sf.b[ii] = -sf.b[ii];
      slack_coef = -slack_coef;
    }
    if (slack[i] != kNone && slack_coef > 0.0) sf.identity_col[i] = slack[i];
  }
  return sf;
}

class Tableau {
 public:
  Tableau(const StandardForm& sf, const LpOptions& opt) : opt_(opt) {
    m_ = static_cast<std::size_t>(sf.a.rows());
    n_std_ = static_cast<std::size_t>(sf.a.cols());
    std::size_t arts = 0;
    for (std::size_t col : sf.identity_col) arts += (col == kNone);
    n_ = n_std_ + arts;
    t_ = RowMatrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_ + 1));
    t_.leftCols(static_cast<Eigen::Index>(n_std_)) = sf.a;
    t_.col(static_cast<Eigen::Index>(n_)) = sf.b;
    basis_.resize(m_);
    std::size_t next_art = n_std_;
    for (std::size_t i = 0; i < m_; ++i) {
      if (sf.identity_col[i] != kNone) {
        basis_[i] = sf.identity_col[i];
      } else {
        t_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(next_art)) = 1.0;
        basis_[i] = next_art++;
      }
    }
    active_.assign(m_, true);
    max_pivots_ = opt.max_pivots ? opt.max_pivots : 50 * (m_ + n_ + 1);
  }

  bool is_artificial(std::size_t col) const noexcept { return col >= n_std_; }
  std::size_t pivots() const noexcept { return pivots_; }
  std::size_t bytes() const noexcept {
    return static_cast<std::size_t>(t_.size()) * sizeof(double);
  }

  // Sets the reduced-cost row for costs c (length n_).
  void price(const Vector& c) {
    d_ = Vector::Zero(static_cast<Eigen::Index>(n_ + 1));
    d_.head(static_cast<Eigen::Index>(n_)) = c;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const double cb = c[static_cast<Eigen::Index>(basis_[i])];
      if (cb != 0.0) d_ -= cb * t_.row(static_cast<Eigen::Index>(i)).transpose();
    }
  }

  double objective() const { return -d_[static_cast<Eigen::Index>(n_)]; }

  // Runs simplex iterations on the current cost row. Columns with
  // allow_artificial == false never enter.
  void optimize(bool allow_artificial) {
    bool bland = opt_.rule == PivotRule::Bland;
    std::size_t degenerate_run = 0;
    for (;;) {
      const std::size_t limit = allow_artificial ? n_ : n_std_;
      std::size_t enter = kNone;
      double best = -opt_.optimality_tol;
      for (std::size_t j = 0; j < limit; ++j) {
        const double dj = d_[static_cast<Eigen::Index>(j)];
        if (dj < best) {
          enter = j;
          if (bland) break;
          best = dj;
        }
      }
      if (enter == kNone) return;

      std::size_t leave = kNone;
      double best_ratio = std::numeric_limits<double>::infinity();
      const auto ec = static_cast<Eigen::Index>(enter);
      const auto rc = static_cast<Eigen::Index>(n_);
      for (std::size_t i = 0; i < m_; ++i) {
        if (!active_[i]) continue;
        const double a = t_(static_cast<Eigen::Index>(i), ec);
        if (a <= opt_.pivot_tol) continue;
        const double ratio = t_(static_cast<Eigen::Index>(i), rc) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && leave != kNone && basis_[i] < basis_[leave])) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
      if (leave == kNone) {
        throw Error(ErrorCode::Unbounded, "objective is unbounded below along column " +
                                              std::to_string(enter));
      }
      if (best_ratio <= 1e-12) {
        if (++degenerate_run >= opt_.degenerate_run_before_bland) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leave, enter);
      if (pivots_ > max_pivots_) {
        throw Error(ErrorCode::CyclingDetected,
                    "pivot limit " + std::to_string(max_pivots_) + " reached");
      }
    }
  }

  // After phase one: pivot basic artificials out, or deactivate redundant rows.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i] || !is_artificial(basis_[i])) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      std::size_t col = kNone;
      double best = opt_.pivot_tol;
      for (std::size_t j = 0; j < n_std_; ++j) {
        const double a = std::abs(t_(ii, static_cast<Eigen::Index>(j)));
        if (a > best) {
          best = a;
          col = j;
        }
      }
      if (col == kNone) {
        active_[i] = false;
      } else {
        pivot(i, col);
      }
    }
  }

  Vector primal() const {
    Vector z = Vector::Zero(static_cast<Eigen::Index>(n_std_));
    for (std::size_t i = 0; i < m_; ++i) {
      if (active_[i] && !is_artificial(basis_[i])) {
        z[static_cast<Eigen::Index>(basis_[i])] =
            t_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n_));
      }
    }
    return z;
  }

  const std::vector<std::size_t>& basis() const noexcept { return basis_; }
  const std::vector<bool>& active() const noexcept { return active_; }

 private:
  void pivot(std::size_t row, std::size_t col) {
    const auto r = static_cast<Eigen::Index>(row);
    const auto c = static_cast<Eigen::Index>(col);
    t_.row(r) /= t_(r, c);
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const double f = t_(ii, c);
      if (f != 0.0) t_.row(ii) -= f * t_.row(r);
    }
    const double fd = d_[c];
    if (fd != 0.0) d_ -= fd * t_.row(r).transpose();
    basis_[row] = col;
    ++pivots_;
  }

  LpOptions opt_;
  std::size_t m_ = 0;
  std::size_t n_std_ = 0;
  std::size_t n_ = 0;
  RowMatrix t_;
  Vector d_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
  std::size_t pivots_ = 0;
  std::size_t max_pivots_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, LpOptions options) {
  problem.validate();
  const StandardForm sf = to_standard_form(problem);
  Tableau tab(sf, options);
  const auto n_std = static_cast<std::size_t>(sf.a.cols());
  const std::size_t n_total = n_std + static_cast<std::size_t>(std::count(
                                          sf.identity_col.begin(), sf.identity_col.end(), kNone));

  // Phase one: minimise the sum of artificials.
  if (n_total > n_std) {
    Vector c1 = Vector::Zero(static_cast<Eigen::Index>(n_total));
    c1.tail(static_cast<Eigen::Index>(n_total - n_std)).setOnes();
    tab.price(c1);
    tab.optimize(true);
    const double infeas = tab.objective();
    if (infeas > 1e-9 * (1.0 + sf.b.lpNorm<Eigen::Infinity>())) {
      throw Error(ErrorCode::Infeasible,
                  "no feasible point (phase-one residual " + std::to_string(infeas) + ")");
    }
    tab.expel_artificials();
  }

  // Phase two.
  Vector c2 = Vector::Zero(static_cast<Eigen::Index>(n_total));
  c2.head(static_cast<Eigen::Index>(n_std)) = sf.c;
  tab.price(c2);
  tab.optimize(false);

  const Vector z = tab.primal();
  LpSolution out;
  out.pivots = tab.pivots();
  out.tableau_bytes = tab.bytes();
  const auto n = static_cast<std::size_t>(problem.objective.size());
  out.x.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    double v = z[static_cast<Eigen::Index>(sf.pos[j])];
    if (sf.neg[j] != kNone) {
      v -= z[static_cast<Eigen::Index>(sf.neg[j])];
    } else {
      v += problem.lower[jj];
    }
    out.x[jj] = v;
  }
  out.objective = problem.objective.dot(out.x);

  // Duals from the final basis: B^T y = c_B over the rows still active.
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < tab.active().size(); ++i) {
    if (tab.active()[i]) rows.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(k, k);
  Vector cb(k);
  Vector b_active(k);
  for (Eigen::Index col = 0; col < k; ++col) {
    const std::size_t var = tab.basis()[rows[static_cast<std::size_t>(col)]];
    cb[col] = var < n_std ? sf.c[static_cast<Eigen::Index>(var)] : 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
      const auto orig_row = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
      basis_matrix(r, col) = var < n_std ? sf.a(orig_row, static_cast<Eigen::Index>(var))
                                         : (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(col)]) == orig_row ? 1.0 : 0.0);
    }
    b_active[col] = sf.b[static_cast<Eigen::Index>(rows[static_cast<std::size_t>(col)])];
  }
  Vector y = Vector::Zero(k);
  if (k > 0) y = basis_matrix.transpose().partialPivLu().solve(cb);
  out.dual_objective = b_active.dot(y) + sf.offset;
  out.duality_gap = std::abs(out.objective - out.dual_objective);
  double min_rc = 0.0;
  for (std::size_t j = 0; j < n_std; ++j) {
    double col_dot = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
      col_dot += y[r] * sf.a(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]),
                             static_cast<Eigen::Index>(j));
    }
    min_rc = std::min(min_rc, sf.c[static_cast<Eigen::Index>(j)] - col_dot);
  }
  out.min_reduced_cost = min_rc;
  return out;
}

}  // namespace flowrec::numerics
