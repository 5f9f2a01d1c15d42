#include "fixtures.hpp"
#include "flowrec/approx.hpp"
#include "flowrec/error.hpp"
#include "flowrec/reconcile.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace flowrec {
namespace {

TEST(Relaxed, TinyEpsilonMatchesExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = fixtures::random_instance(seed, 12);
    const FlowAggregationMatrix s(inst.network);
    const Vector exact = reconcile_l2(inst.base, s).y_tilde;
    const auto r = reconcile_relaxed(inst.base, s, 1e-12);
    EXPECT_LE((r.y_eps - exact).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE(r.max_violation, 1e-12 + 1e-15);
  }
}

TEST(Relaxed, CoherentInputUnchanged) {
  const auto inst = fixtures::random_instance(2, 12, std::nullopt, 0.0);
  const FlowAggregationMatrix s(inst.network);
  for (double eps : {1e-3, 0.1, 5.0}) {
    const auto r = reconcile_relaxed(inst.truth, s, eps);
    EXPECT_LE((r.y_eps - inst.truth).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE(r.max_violation, 1e-6);
  }
}

TEST(Relaxed, DeviationBoundAndObjective) {
  const auto inst = fixtures::random_instance(20, 20);
  const FlowAggregationMatrix s(inst.network);
  const auto exact = reconcile_l2(inst.base, s);
  RelaxedOptions opt;
  opt.exact = exact.y_tilde;
  const auto r = reconcile_relaxed(inst.base, s, 0.1, opt);
  ASSERT_TRUE(r.deviation.has_value());
  EXPECT_LE(*r.deviation, std::sqrt(0.1 * double(s.num_edges())) * exact.y_tilde.norm());
  EXPECT_LE(r.objective, exact.loss_value + 1e-9 * (1 + exact.loss_value));
  EXPECT_LE(r.max_violation, 0.1 + 1e-12);
  EXPECT_NEAR(*r.deviation, (r.y_eps - exact.y_tilde).norm(), 1e-12);
}

TEST(Relaxed, NodeTotalsStayExact) {
  const auto inst = fixtures::random_instance(21, 15);
  const FlowAggregationMatrix s(inst.network);
  const auto r = reconcile_relaxed(inst.base, s, 0.5);
  const CoherenceReport c = check_coherence(r.y_eps, s);
  EXPECT_LE(c.max_node_residual, 1e-9 * (1 + r.y_eps.cwiseAbs().maxCoeff()));
  EXPECT_LE(c.max_edge_residual, 0.5 + 1e-12);
  EXPECT_NEAR(c.max_edge_residual, r.max_violation, 1e-9);
}

TEST(Relaxed, ObjectiveNonincreasingInEpsilon) {
  const auto inst = fixtures::random_instance(22, 15);
  const FlowAggregationMatrix s(inst.network);
  double prev = reconcile_l2(inst.base, s).loss_value;
  for (double eps : {1e-3, 1e-2, 1e-1, 1.0}) {
    const double obj = reconcile_relaxed(inst.base, s, eps).objective;
    EXPECT_LE(obj, prev + 1e-9 * (1 + prev));
    prev = obj;
  }
}

TEST(Relaxed, RejectsNonPositiveEpsilon) {
  const FlowAggregationMatrix s(fixtures::chain());
  EXPECT_THROW(reconcile_relaxed(Vector::Zero(6), s, 0.0), Error);
  EXPECT_THROW(reconcile_relaxed(Vector::Zero(6), s, -1.0), Error);
  EXPECT_THROW(reconcile_relaxed(Vector::Zero(5), s, 1.0), Error);
}

}  // namespace
}  // namespace flowrec
