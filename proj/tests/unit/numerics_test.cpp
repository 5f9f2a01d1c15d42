#include "fixtures.hpp"
#include "flowrec/descent.hpp"
#include "flowrec/error.hpp"
#include "flowrec/lp.hpp"
#include "flowrec/sparse.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace flowrec::numerics {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::SolveFailure;
}

TEST(SolveSpd, Identity) {
  const SparseSpd m(CsrMatrix::from_dense(Eigen::MatrixXd::Identity(4, 4)));
  const Eigen::Vector4d r(1, -2, 3, 0.5);
  EXPECT_LE((solve_spd(m, r).x - r).norm(), 1e-14);
}

TEST(SolveSpd, Diagonal) {
  const Eigen::Vector3d d(2, 4, 8);
  const SparseSpd m(CsrMatrix::from_dense(d.asDiagonal().toDenseMatrix()));
  const Eigen::Vector3d r(2, 2, 2);
  EXPECT_LE((solve_spd(m, r).x - Eigen::Vector3d(1, 0.5, 0.25)).norm(), 1e-14);
}

TEST(SolveSpd, RandomMatchesElimination) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a(8, 8);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = std::normal_distribution<>()(rng);
    const Eigen::MatrixXd spd = a * a.transpose() + Eigen::MatrixXd::Identity(8, 8);
    const Vector rhs = fixtures::random_vector(rng, 8, -1, 1);
    const auto res = solve_spd(SparseSpd(CsrMatrix::from_dense(spd)), rhs);
    EXPECT_LE((spd * res.x - rhs).norm(), 1e-12 * rhs.norm());
    oracle::Matrix dense(8, oracle::Values(8));
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) dense[i][j] = spd(i, j);
    const Vector expect = fixtures::from_std(oracle::gauss_solve(dense, fixtures::to_std(rhs)));
    EXPECT_LE((res.x - expect).norm(), 1e-9 * (1 + expect.norm()));
  }
}

TEST(SolveSpd, RejectsIndefiniteAndAsymmetric) {
  Eigen::Matrix2d m;
  m << 1, 0, 0, -1;
  EXPECT_EQ(code_of([&] { solve_spd(SparseSpd(CsrMatrix::from_dense(m)), Eigen::Vector2d(0, 1)); }),
            ErrorCode::NotPositiveDefinite);
  m << 1, 2, 0, 1;
  EXPECT_EQ(code_of([&] { SparseSpd(CsrMatrix::from_dense(m)); }), ErrorCode::NotSpd);
  EXPECT_EQ(code_of([&] {
              solve_spd(SparseSpd(CsrMatrix::from_dense(Eigen::Matrix2d::Identity())),
                        Eigen::Vector3d(1, 1, 1));
            }),
            ErrorCode::DimensionMismatch);
}

TEST(SolveLp, SingleLowerBound) {
  LpProblem lp;
  lp.objective = Vector::Ones(1);
  lp.constraints = Eigen::MatrixXd::Ones(1, 1);
  lp.relations = {Relation::GreaterEqual};
  lp.rhs = Vector::Constant(1, 3.0);
  lp.lower = Vector::Constant(1, -kInf);
  const LpSolution sol = solve_lp(lp);
  EXPECT_NEAR(sol.x[0], 3.0, 1e-12);
  EXPECT_NEAR(sol.objective, 3.0, 1e-12);
  EXPECT_NEAR(sol.duality_gap, 0.0, 1e-10);
}

TEST(SolveLp, AbsoluteValueGadget) {
  // variables (y, s): min s, s + y >= 5, s - y >= -5
  LpProblem lp;
  lp.objective = Eigen::Vector2d(0, 1);
  lp.constraints.resize(2, 2);
  lp.constraints << 1, 1, -1, 1;
  lp.relations = {Relation::GreaterEqual, Relation::GreaterEqual};
  lp.rhs = Eigen::Vector2d(5, -5);
  lp.lower = Eigen::Vector2d(-kInf, 0);
  for (PivotRule rule : {PivotRule::Bland, PivotRule::DantzigThenBland}) {
    LpOptions opt;
    opt.rule = rule;
    const LpSolution sol = solve_lp(lp, opt);
    EXPECT_NEAR(sol.x[0], 5.0, 1e-10);
    EXPECT_NEAR(sol.x[1], 0.0, 1e-10);
    EXPECT_NEAR(sol.objective, 0.0, 1e-10);
  }
}

TEST(SolveLp, EqualityAndUpperRows) {
  // min -x1 - 2 x2 s.t. x1 + x2 = 4, x2 <= 3, x >= 0  ->  (1, 3), -7
  LpProblem lp;
  lp.objective = Eigen::Vector2d(-1, -2);
  lp.constraints.resize(2, 2);
  lp.constraints << 1, 1, 0, 1;
  lp.relations = {Relation::Equal, Relation::LessEqual};
  lp.rhs = Eigen::Vector2d(4, 3);
  lp.lower = Vector::Zero(2);
  const LpSolution sol = solve_lp(lp);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-10);
  EXPECT_NEAR(sol.x[1], 3.0, 1e-10);
  EXPECT_NEAR(sol.objective, -7.0, 1e-10);
  EXPECT_NEAR(sol.dual_objective, -7.0, 1e-9);
  EXPECT_GE(sol.min_reduced_cost, -1e-9);
}

TEST(SolveLp, InfeasibleAndUnbounded) {
  LpProblem lp;
  lp.objective = Vector::Ones(1);
  lp.constraints.resize(2, 1);
  lp.constraints << 1, 1;
  lp.relations = {Relation::GreaterEqual, Relation::LessEqual};
  lp.rhs = Eigen::Vector2d(5, 3);
  lp.lower = Vector::Zero(1);
  EXPECT_EQ(code_of([&] { solve_lp(lp); }), ErrorCode::Infeasible);

  LpProblem unb;
  unb.objective = Vector::Constant(1, -1.0);
  unb.constraints = Eigen::MatrixXd::Ones(1, 1);
  unb.relations = {Relation::GreaterEqual};
  unb.rhs = Vector::Zero(1);
  unb.lower = Vector::Zero(1);
  EXPECT_EQ(code_of([&] { solve_lp(unb); }), ErrorCode::Unbounded);
}

TEST(SolveLp, RandomStrongDuality) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    // min c^T x, A x <= b with b > 0 (origin feasible), x in [0, inf), c >= 0 mixed sign rows
    const int m = 6;
    const int n = 4;
    LpProblem lp;
    lp.objective = fixtures::random_vector(rng, n, -1, 1);
    lp.constraints = Eigen::MatrixXd(m + n, n);
    for (Eigen::Index i = 0; i < lp.constraints.size(); ++i) lp.constraints.data()[i] = u(rng);
    lp.constraints.bottomRows(n).setIdentity();
    lp.relations.assign(m + n, Relation::LessEqual);
    lp.rhs = fixtures::random_vector(rng, m + n, 0.5, 2);
    lp.lower = Vector::Zero(n);
    const LpSolution sol = solve_lp(lp);
    EXPECT_LE(std::abs(sol.duality_gap), 1e-8);
    EXPECT_GE(sol.min_reduced_cost, -1e-8);
    EXPECT_LE(((lp.constraints * sol.x) - lp.rhs).maxCoeff(), 1e-9);
  }
}

TEST(SolveLp, L1ChainMatchesVertexSearch) {
  // l1 reconciliation of the chain with node a at 10: variables (b, s_0..s_5).
  const FlowAggregationMatrix s(fixtures::chain());
  const Eigen::MatrixXd d = s.dense();
  Vector yhat = Vector::Constant(6, 4.0);
  yhat[1] = 10.0;
  LpProblem lp;
  lp.objective = Vector::Ones(7);
  lp.objective[0] = 0.0;
  lp.constraints = Eigen::MatrixXd::Zero(12, 7);
  lp.rhs.resize(12);
  for (Eigen::Index i = 0; i < 6; ++i) {
    lp.constraints(2 * i, 0) = d(i, 0);
    lp.constraints(2 * i, 1 + i) = 1;
    lp.rhs[2 * i] = yhat[i];
    lp.constraints(2 * i + 1, 0) = -d(i, 0);
    lp.constraints(2 * i + 1, 1 + i) = 1;
    lp.rhs[2 * i + 1] = -yhat[i];
  }
  lp.relations.assign(12, Relation::GreaterEqual);
  lp.lower = Vector::Zero(7);
  lp.lower[0] = -kInf;
  const LpSolution sol = solve_lp(lp);
  const oracle::Matrix dense = oracle::aggregation_matrix(fixtures::chain());
  const auto best = oracle::l1_vertex_search(dense, fixtures::to_std(yhat));
  EXPECT_NEAR(sol.objective, best.objective, 1e-9);
  EXPECT_NEAR(sol.x[0], best.b[0], 1e-9);
  EXPECT_NEAR(sol.objective, 6.0, 1e-9);
}

TEST(Descent, QuadraticReachesCentre) {
  const Eigen::Vector3d c(1, -2, 3.5);
  const SmoothObjective f = [&](const Vector& x, Vector* g) {
    if (g) *g = 2 * (x - c);
    return (x - c).squaredNorm();
  };
  const DescentResult r = minimize_smooth_convex(f, Vector::Zero(3));
  EXPECT_LE((r.x - c).norm(), 1e-7);
}

TEST(Descent, HuberBetweenTwoTargets) {
  const auto huber = [](double u, double* d) {
    if (std::abs(u) <= 1.0) {
      if (d) *d = u;
      return 0.5 * u * u;
    }
    if (d) *d = u > 0 ? 1.0 : -1.0;
    return std::abs(u) - 0.5;
  };
  const SmoothObjective f = [&](const Vector& x, Vector* g) {
    double d0 = 0;
    double d1 = 0;
    const double v = huber(x[0], &d0) + huber(x[0] - 10.0, &d1);
    if (g) *g = Vector::Constant(1, d0 + d1);
    return v;
  };
  for (double start : {-3.0, 2.0, 14.0}) {
    // the objective is flat on [1, 9]; any point there is a minimizer
    const DescentResult r = minimize_smooth_convex(f, Vector::Constant(1, start));
    EXPECT_GE(r.x[0], 1.0 - 1e-6);
    EXPECT_LE(r.x[0], 9.0 + 1e-6);
    EXPECT_NEAR(r.value, 9.0, 1e-8);
  }
  EXPECT_NEAR(minimize_smooth_convex(f, Vector::Constant(1, 5.0)).x[0], 5.0, 1e-12);
}

TEST(Descent, BoxProjection) {
  const SmoothObjective f = [](const Vector& x, Vector* g) {
    if (g) *g = 2 * (x - Eigen::Vector2d(5, -5));
    return (x - Eigen::Vector2d(5, -5)).squaredNorm();
  };
  DescentOptions opt;
  opt.lower = Eigen::Vector2d(-kInf, -1);
  opt.upper = Eigen::Vector2d(2, kInf);
  const DescentResult r = minimize_smooth_convex(f, Vector::Zero(2), opt);
  EXPECT_NEAR(r.x[0], 2.0, 1e-9);
  EXPECT_NEAR(r.x[1], -1.0, 1e-9);
}

TEST(Descent, IterationCap) {
  const SmoothObjective f = [](const Vector& x, Vector* g) {
    if (g) *g = Vector::Constant(1, 4 * std::pow(x[0], 3));
    return std::pow(x[0], 4);
  };
  DescentOptions opt;
  opt.max_iterations = 2;
  opt.tol = 1e-300;
  EXPECT_EQ(code_of([&] { minimize_smooth_convex(f, Vector::Constant(1, 3.0), opt); }),
            ErrorCode::NoConvergence);
}

}  // namespace
}  // namespace flowrec::numerics
