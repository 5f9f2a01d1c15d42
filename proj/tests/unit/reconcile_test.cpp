#include "fixtures.hpp"
#include "flowrec/error.hpp"
#include "flowrec/reconcile.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace flowrec {
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

Vector chain_with_outlier() {
  Vector y = Vector::Constant(6, 4.0);
  y[1] = 10.0;
  return y;
}

Vector two_path_perturbed() {
  const FlowAggregationMatrix s(fixtures::two_paths());
  Vector y = s.multiply(Eigen::Vector2d(3, 5));
  y[0] = 11.0;
  return y;
}

TEST(ReconcileL2, CoherentInputUnchanged) {
  const auto inst = fixtures::random_instance(4, 12, std::nullopt, 0.0);
  const FlowAggregationMatrix s(inst.network);
  const auto r = reconcile_l2(inst.truth, s);
  EXPECT_LE((r.y_tilde - inst.truth).cwiseAbs().maxCoeff(), 1e-9 * inst.truth.norm());
  EXPECT_LE(r.loss_value, 1e-12 * inst.truth.squaredNorm());
}

TEST(ReconcileL2, TwoPathsMatchNormalEquations) {
  const Network net = fixtures::two_paths();
  const FlowAggregationMatrix s(net);
  const Vector yhat = two_path_perturbed();
  const auto r = reconcile_l2(yhat, s);
  const auto b = oracle::weighted_least_squares(oracle::aggregation_matrix(net),
                                                fixtures::to_std(yhat));
  EXPECT_NEAR(r.b_tilde[0], b[0], 1e-10);
  EXPECT_NEAR(r.b_tilde[1], b[1], 1e-10);
  EXPECT_LT(r.loss_value, 9.0);
  EXPECT_TRUE(r.coherence.coherent);
  EXPECT_EQ(r.stats.method, "l2");
}

TEST(ReconcileL2, Idempotent) {
  const auto inst = fixtures::random_instance(8, 14);
  const FlowAggregationMatrix s(inst.network);
  const auto once = reconcile_l2(inst.base, s);
  const auto twice = reconcile_l2(once.y_tilde, s);
  EXPECT_LE((twice.y_tilde - once.y_tilde).cwiseAbs().maxCoeff(),
            1e-9 * (1 + once.y_tilde.cwiseAbs().maxCoeff()));
}

TEST(ReconcileL2, OrthogonalResidual) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = fixtures::random_instance(seed, 20);
    const FlowAggregationMatrix s(inst.network);
    const auto r = reconcile_l2(inst.base, s);
    EXPECT_LE(r.certificate, 1e-6 * inst.base.norm());
    EXPECT_EQ(r.certificate_kind, "orthogonality");
  }
}

TEST(ReconcileL2, WeightedMatchesOracle) {
  const Network net = fixtures::two_paths();
  const FlowAggregationMatrix s(net);
  const Vector yhat = two_path_perturbed();
  Vector w(10);
  w << 1, 2, 3, 4, 0.5, 1, 1, 2, 1, 3;
  const auto r = reconcile_l2(yhat, s, w);
  const auto b = oracle::weighted_least_squares(oracle::aggregation_matrix(net),
                                                fixtures::to_std(yhat), fixtures::to_std(w));
  EXPECT_NEAR(r.b_tilde[0], b[0], 1e-10);
  EXPECT_NEAR(r.b_tilde[1], b[1], 1e-10);
}

TEST(ReconcileL2, RejectsBadInput) {
  const FlowAggregationMatrix s(fixtures::chain());
  EXPECT_EQ(code_of([&] { reconcile_l2(Vector::Zero(5), s); }), ErrorCode::DimensionMismatch);
  Vector y = Vector::Zero(6);
  y[2] = std::nan("");
  EXPECT_EQ(code_of([&] { reconcile_l2(y, s); }), ErrorCode::NonFinite);
}

TEST(ReconcileWeighted, SatisfiedConstraintUnchanged) {
  const Eigen::MatrixXd a = Eigen::RowVector2d(1, 1);
  const Vector y = reconcile_weighted(Eigen::Vector2d(4, 6), a, Vector::Constant(1, 10.0),
                                      Eigen::Matrix2d::Identity());
  EXPECT_NEAR(y[0], 4.0, 1e-14);
  EXPECT_NEAR(y[1], 6.0, 1e-14);
}

TEST(ReconcileWeighted, IdentitySplitsDeficitEqually) {
  const Eigen::MatrixXd a = Eigen::RowVector2d(1, 1);
  const Vector y = reconcile_weighted(Eigen::Vector2d(3, 5), a, Vector::Constant(1, 10.0),
                                      Eigen::Matrix2d::Identity());
  EXPECT_NEAR(y[0], 4.0, 1e-12);
  EXPECT_NEAR(y[1], 6.0, 1e-12);
}

TEST(ReconcileWeighted, DiagonalWeightsAndKkt) {
  const Eigen::MatrixXd a = Eigen::RowVector2d(1, 1);
  const Eigen::Matrix2d w = Eigen::Vector2d(1, 4).asDiagonal();
  const Eigen::Vector2d yhat(3, 5);
  const Vector y = reconcile_weighted(yhat, a, Vector::Constant(1, 10.0), w);
  EXPECT_NEAR(y[0], 4.6, 1e-12);
  EXPECT_NEAR(y[1], 5.4, 1e-12);
  // W (y - yhat) must be parallel to A^T
  const Vector g = w * (y - yhat);
  EXPECT_NEAR(g[0], g[1], 1e-12);
}

TEST(ReconcileWeighted, IdentityWeightMatchesL2) {
  const auto inst = fixtures::random_instance(9, 10);
  const FlowAggregationMatrix s(inst.network);
  const Eigen::MatrixXd a = coherence_constraints(s);
  const auto n = static_cast<Eigen::Index>(s.rows());
  const Vector y = reconcile_weighted(inst.base, a, Vector::Zero(a.rows()),
                                      Eigen::MatrixXd::Identity(n, n));
  const Vector l2 = reconcile_l2(inst.base, s).y_tilde;
  EXPECT_LE((y - l2).norm(), 1e-8 * l2.norm());
}

TEST(ReconcileWeighted, ScalingWeightsLeavesSolution) {
  const Eigen::MatrixXd a = Eigen::RowVector2d(1, 1);
  const Eigen::Matrix2d w = Eigen::Vector2d(1, 4).asDiagonal();
  const Vector y1 = reconcile_weighted(Eigen::Vector2d(3, 5), a, Vector::Constant(1, 10.0), w);
  const Vector y2 =
      reconcile_weighted(Eigen::Vector2d(3, 5), a, Vector::Constant(1, 10.0), 7.5 * w);
  EXPECT_LE((y1 - y2).norm(), 1e-12);
}

TEST(ReconcileWeighted, Errors) {
  const Eigen::MatrixXd a = Eigen::RowVector2d(1, 1);
  Eigen::Matrix2d w;
  w << 1, 0, 0, -1;
  EXPECT_EQ(code_of([&] { reconcile_weighted(Eigen::Vector2d(3, 5), a, Vector::Ones(1), w); }),
            ErrorCode::NotSpd);
  Eigen::MatrixXd dup(2, 2);
  dup << 1, 1, 2, 2;
  EXPECT_EQ(code_of([&] {
              reconcile_weighted(Eigen::Vector2d(3, 5), dup, Vector::Ones(2),
                                 Eigen::Matrix2d::Identity());
            }),
            ErrorCode::RankDeficient);
  EXPECT_EQ(code_of([&] {
              reconcile_weighted(Eigen::Vector2d(3, 5), a, Vector::Ones(1),
                                 Eigen::Matrix2d::Identity(), BoxConstraints::unbounded(2));
            }),
            ErrorCode::BadParameter);
}

TEST(ReconcileL1, CoherentInputUnchanged) {
  const FlowAggregationMatrix s(fixtures::two_paths());
  const Vector y = s.multiply(Eigen::Vector2d(3, 5));
  const auto r = reconcile_l1(y, s);
  EXPECT_LE((r.y_tilde - y).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(r.loss_value, 0.0, 1e-9);
}

TEST(ReconcileL1, ChainOutlierMovesOneComponent) {
  const FlowAggregationMatrix s(fixtures::chain());
  const auto r = reconcile_l1(chain_with_outlier(), s);
  EXPECT_NEAR(r.b_tilde[0], 4.0, 1e-9);
  EXPECT_NEAR(r.loss_value, 6.0, 1e-9);
  EXPECT_LE(std::abs(r.certificate), 1e-7);
  EXPECT_EQ(r.certificate_kind, "duality_gap");
}

TEST(ReconcileL1, BoxPullsPathDown) {
  const FlowAggregationMatrix s(fixtures::chain());
  BoxConstraints box = BoxConstraints::unbounded(6);
  box.upper[1] = 3.0;
  const auto r = reconcile_l1(Vector::Constant(6, 4.0), s, box);
  EXPECT_NEAR(r.b_tilde[0], 3.0, 1e-9);
  EXPECT_NEAR(r.loss_value, 6.0, 1e-9);
}

TEST(ReconcileL1, InfeasibleBox) {
  const FlowAggregationMatrix s(fixtures::chain());
  BoxConstraints box = BoxConstraints::unbounded(6);
  box.upper[1] = 3.0;
  box.lower[4] = 5.0;
  EXPECT_EQ(code_of([&] { reconcile_l1(Vector::Constant(6, 4.0), s, box); }),
            ErrorCode::Infeasible);
}

TEST(ReconcileL1, TwoPathsMatchVertexSearch) {
  const Network net = fixtures::two_paths();
  const FlowAggregationMatrix s(net);
  const oracle::Matrix dense = oracle::aggregation_matrix(net);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector yhat = fixtures::random_vector(rng, 10, 0, 20);
    const Vector w = fixtures::random_vector(rng, 10, 0.5, 3);
    const auto r = reconcile_l1(yhat, s, std::nullopt, w);
    const auto best = oracle::l1_vertex_search(dense, fixtures::to_std(yhat), fixtures::to_std(w));
    EXPECT_NEAR(r.loss_value, best.objective, 1e-8);
    EXPECT_LE(std::abs(r.certificate), 1e-7);
  }
}

TEST(ReconcileL1, BoxedTwoPathsMatchVertexSearch) {
  const Network net = fixtures::two_paths();
  const FlowAggregationMatrix s(net);
  const oracle::Matrix dense = oracle::aggregation_matrix(net);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector yhat = fixtures::random_vector(rng, 10, 0, 20);
    BoxConstraints box = BoxConstraints::unbounded(10);
    box.upper[0] = 12.0;
    box.lower[8] = 2.0;
    const auto r = reconcile_l1(yhat, s, box);
    const auto best = oracle::l1_vertex_search(dense, fixtures::to_std(yhat), {},
                                               {{0, 12.0, true}, {8, 2.0, false}});
    EXPECT_NEAR(r.loss_value, best.objective, 1e-8);
    EXPECT_LE(r.y_tilde[0], 12.0 + 1e-9);
    EXPECT_GE(r.y_tilde[8], 2.0 - 1e-9);
  }
}

TEST(ReconcileGeneral, LargeDeltaHuberIsL2) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto inst = fixtures::random_instance(seed, 10);
    const FlowAggregationMatrix s(inst.network);
    const auto l2 = reconcile_l2(inst.base, s);
    const double delta = 10.0 * (1.0 + (l2.y_tilde - inst.base).cwiseAbs().maxCoeff());
    const auto h = reconcile_general(inst.base, s, LossSpec::huber(delta));
    EXPECT_LE((h.y_tilde - l2.y_tilde).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ReconcileGeneral, HuberChainBetweenL1AndL2) {
  const FlowAggregationMatrix s(fixtures::chain());
  const Vector yhat = chain_with_outlier();
  const LossSpec loss = LossSpec::huber(1.0);
  const auto h = reconcile_general(yhat, s, loss);
  const double l1 = reconcile_l1(yhat, s).b_tilde[0];
  const double l2 = reconcile_l2(yhat, s).b_tilde[0];
  EXPECT_GT(h.b_tilde[0], l1 + 1e-3);
  EXPECT_LT(h.b_tilde[0], l2 - 1e-3);
  const double grid = oracle::grid_argmin_1d(
      [&](double b) { return loss_value(loss, yhat, s.multiply(Vector::Constant(1, b))); }, 0.0,
      12.0, 1e-2);
  EXPECT_NEAR(h.b_tilde[0], grid, 1e-4);
  EXPECT_NEAR(h.b_tilde[0], 4.2, 1e-6);
}

TEST(ReconcileGeneral, QuarticMatchesGrid) {
  const Network net = fixtures::two_paths();
  const FlowAggregationMatrix s(net);
  Vector yhat(10);
  yhat << 11, 3, 6, 8, 2, 5, 4, 5, 3, 4;
  const LossSpec loss = LossSpec::custom([](double u) { return u * u * u * u; },
                                         [](double u) { return 4 * u * u * u; });
  const auto r = reconcile_general(yhat, s, loss);
  const auto objective = [&](double b0, double b1) {
    return loss_value(loss, yhat, s.multiply(Eigen::Vector2d(b0, b1)));
  };
  const auto coarse = oracle::grid_argmin_2d(objective, 0, 12, 0, 12, 0.05);
  const auto fine = oracle::grid_argmin_2d(objective, coarse.first - 0.1, coarse.first + 0.1,
                                           coarse.second - 0.1, coarse.second + 0.1, 1e-3);
  EXPECT_NEAR(r.b_tilde[0], fine.first, 1e-3);
  EXPECT_NEAR(r.b_tilde[1], fine.second, 1e-3);
  EXPECT_LE(r.loss_value, objective(fine.first, fine.second) + 1e-9);
}

TEST(ReconcileGeneral, UniqueFromDifferentStarts) {
  const auto inst = fixtures::random_instance(12, 10);
  const FlowAggregationMatrix s(inst.network);
  GeneralOptions a;
  GeneralOptions b;
  b.start = Vector::Zero(static_cast<Eigen::Index>(s.cols()));
  const LossSpec loss = LossSpec::huber(0.5);
  const auto ra = reconcile_general(inst.base, s, loss, a);
  const auto rb = reconcile_general(inst.base, s, loss, b);
  EXPECT_NEAR(ra.loss_value, rb.loss_value, 1e-6 * (1 + ra.loss_value));
}

TEST(ReconcileGeneral, CertificateIsGradientNorm) {
  const auto inst = fixtures::random_instance(13, 12);
  const FlowAggregationMatrix s(inst.network);
  const auto r = reconcile_general(inst.base, s, LossSpec::huber(1.0));
  EXPECT_LE(r.certificate, 1e-8 * (1 + r.loss_value));
  EXPECT_TRUE(r.coherence.coherent);
}

TEST(ReconcileGeneral, PathBoxRespected) {
  const FlowAggregationMatrix s(fixtures::chain());
  BoxConstraints box = BoxConstraints::unbounded(6);
  box.upper[5] = 4.1;
  GeneralOptions opt;
  opt.box = box;
  const auto r = reconcile_general(chain_with_outlier(), s, LossSpec::huber(1.0), opt);
  EXPECT_NEAR(r.b_tilde[0], 4.1, 1e-9);
  BoxConstraints node_box = BoxConstraints::unbounded(6);
  node_box.upper[1] = 3.0;
  opt.box = node_box;
  EXPECT_EQ(code_of([&] { reconcile_general(chain_with_outlier(), s, LossSpec::huber(1.0), opt); }),
            ErrorCode::BadParameter);
}

TEST(ReconcileGeneral, RejectsNonSmoothLosses) {
  const FlowAggregationMatrix s(fixtures::chain());
  EXPECT_EQ(code_of([&] { reconcile_general(Vector::Zero(6), s, LossSpec::l1()); }),
            ErrorCode::NonSmoothLoss);
  const LossSpec abs_loss = LossSpec::custom([](double u) { return u; }, [](double) { return 1.0; });
  EXPECT_EQ(code_of([&] { reconcile_general(Vector::Zero(6), s, abs_loss); }),
            ErrorCode::NonSmoothLoss);
}

TEST(Loss, ParseAndDescribe) {
  EXPECT_EQ(parse_loss("l2")->kind, LossKind::L2);
  EXPECT_EQ(parse_loss("l1")->kind, LossKind::L1);
  const auto h = parse_loss("huber:2.5");
  ASSERT_TRUE(h.has_value());
  EXPECT_EQ(h->kind, LossKind::Huber);
  EXPECT_EQ(h->delta, 2.5);
  EXPECT_FALSE(parse_loss("huber:").has_value());
  EXPECT_FALSE(parse_loss("huber:-1").has_value());
  EXPECT_FALSE(parse_loss("l3").has_value());
  EXPECT_EQ(describe(*h), "huber:2.5");
}

TEST(Loss, Values) {
  const LossSpec h = LossSpec::huber(1.0);
  EXPECT_DOUBLE_EQ(h.value(0.5), 0.125);
  EXPECT_DOUBLE_EQ(h.value(-3.0), 2.5);
  EXPECT_DOUBLE_EQ(h.derivative(-3.0), -1.0);
  EXPECT_DOUBLE_EQ(LossSpec::l2().value(3.0), 9.0);
  EXPECT_DOUBLE_EQ(LossSpec::l1().value(-3.0), 3.0);
}

TEST(Dispatch, RoutesByLoss) {
  const FlowAggregationMatrix s(fixtures::chain());
  const Vector y = chain_with_outlier();
  EXPECT_NEAR(reconcile(y, s, LossSpec::l2()).b_tilde[0], 5.0, 1e-10);
  EXPECT_NEAR(reconcile(y, s, LossSpec::l1()).b_tilde[0], 4.0, 1e-9);
  EXPECT_NEAR(reconcile(y, s, LossSpec::huber(1.0)).b_tilde[0], 4.2, 1e-6);
  BoxConstraints box = BoxConstraints::unbounded(6);
  box.upper[5] = 4.5;
  EXPECT_NEAR(reconcile(y, s, LossSpec::l2(), box).b_tilde[0], 4.5, 1e-8);
}

}  // namespace
}  // namespace flowrec
