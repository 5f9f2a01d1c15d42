#include "fixtures.hpp"
#include "flowrec/error.hpp"
#include "flowrec/series.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace flowrec {
namespace {

TEST(ForecastVector, RejectsNonFinite) {
  Vector v(3);
  v << 1, std::numeric_limits<double>::quiet_NaN(), 2;
  EXPECT_THROW(ForecastVector{v}, Error);
  v[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ForecastVector{v}, Error);
  v[1] = 0;
  EXPECT_THROW(ForecastVector(v, 0), Error);
  const ForecastVector ok(v, 3, 17);
  EXPECT_EQ(ok.horizon(), 3);
  EXPECT_EQ(ok.origin(), 17);
}

TEST(HierarchicalSeries, ValidatesShape) {
  EXPECT_THROW(HierarchicalSeries({}, {}), Error);
  EXPECT_THROW(HierarchicalSeries({1, 2}, {Vector::Zero(3)}), Error);
  EXPECT_THROW(HierarchicalSeries({1, 2}, {Vector::Zero(3), Vector::Zero(2)}), Error);
  EXPECT_THROW(HierarchicalSeries({2, 2}, {Vector::Zero(3), Vector::Zero(3)}), Error);
  const HierarchicalSeries s({1, 2}, {Vector::Zero(3), Vector::Ones(3)});
  EXPECT_EQ(s.length(), 2u);
  EXPECT_EQ(s.dimension(), 3u);
}

TEST(Coherence, AggregatedVectorIsCoherent) {
  const auto inst = fixtures::random_instance(5, 12);
  const FlowAggregationMatrix s(inst.network);
  std::mt19937_64 rng(1);
  const Vector b = fixtures::random_vector(rng, static_cast<Eigen::Index>(s.cols()), 0, 50);
  const CoherenceReport r = check_coherence(aggregate_bottom(b, s), s, 0.0);
  EXPECT_TRUE(r.coherent);
  EXPECT_EQ(r.max_edge_residual, 0.0);
  EXPECT_EQ(r.max_node_residual, 0.0);
}

TEST(Coherence, StoreNodeS1MatchesInflows) {
  const Network net = fixtures::stores();
  const FlowAggregationMatrix s(net);
  const Vector y = aggregate_bottom(fixtures::store_flows(), s);
  const std::size_t s1 = *net.find_node("S1");
  EXPECT_EQ(y[static_cast<Eigen::Index>(s1)], 280.0);
  EXPECT_EQ(check_coherence(y, s).node_residuals[static_cast<Eigen::Index>(s1)], 0.0);
}

TEST(Coherence, PerturbedPathShowsOnTouchedComponents) {
  const Network net = fixtures::chain();
  const FlowAggregationMatrix s(net);
  Vector b(1);
  b << 4.0;
  Vector y = aggregate_bottom(b, s);
  const double delta = 0.75;
  y[5] += delta;
  const CoherenceReport r = check_coherence(y, s);
  EXPECT_FALSE(r.coherent);
  EXPECT_DOUBLE_EQ(r.max_edge_residual, delta);
  EXPECT_DOUBLE_EQ(r.max_node_residual, delta);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(r.node_residuals[i], delta);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(r.edge_residuals[i], delta);
}

TEST(Coherence, ToleranceAndDimensionChecks) {
  const FlowAggregationMatrix s(fixtures::chain());
  EXPECT_THROW(check_coherence(Vector::Zero(5), s), Error);
  EXPECT_THROW(check_coherence(Vector::Zero(6), s, -1.0), Error);
  Vector y = Vector::Constant(6, 100.0);
  EXPECT_DOUBLE_EQ(default_coherence_tolerance(y), 1e-8 * 101.0);
  y[0] += 1e-7;
  EXPECT_TRUE(check_coherence(y, s).coherent);
  y[0] += 1e-5;
  EXPECT_FALSE(check_coherence(y, s).coherent);
}

TEST(AggregateBottom, ZeroAndTwoPaths) {
  const FlowAggregationMatrix s(fixtures::two_paths());
  EXPECT_EQ(aggregate_bottom(Vector::Zero(2), s), Vector::Zero(10));
  const Vector y = aggregate_bottom(Eigen::Vector2d(3, 5), s);
  EXPECT_EQ(y.head(4), Eigen::Vector4d(8, 3, 5, 8));
  EXPECT_EQ(y.segment(4, 4), Eigen::Vector4d(3, 5, 3, 5));
  EXPECT_EQ(y.tail(2), Eigen::Vector2d(3, 5));
}

TEST(AggregateBottom, StoreS3) {
  const Network net = fixtures::stores();
  const Vector y = aggregate_bottom(fixtures::store_flows(), FlowAggregationMatrix(net));
  EXPECT_EQ(y[static_cast<Eigen::Index>(*net.find_node("S3"))], 250.0);
  EXPECT_EQ(y[static_cast<Eigen::Index>(*net.find_node("S2"))], 400.0);
}

TEST(Conservation, SuppliesAtEndpointsOnly) {
  const Network net = fixtures::two_paths();
  const Vector y = aggregate_bottom(Eigen::Vector2d(3, 5), FlowAggregationMatrix(net));
  const ConservationReport r = check_conservation(y, net);
  EXPECT_EQ(r.supply, Eigen::Vector4d(8, 0, 0, -8));
  EXPECT_EQ(r.net_outflow, Eigen::Vector4d(8, 0, 0, -8));
  EXPECT_EQ(r.max_supply_mismatch, 0.0);
}

TEST(Conservation, IntermediateImbalanceOnRandomCoherentVector) {
  const auto inst = fixtures::random_instance(11, 15, std::nullopt, 0.0);
  const ConservationReport r = check_conservation(inst.truth, inst.network);
  EXPECT_LE(r.max_supply_mismatch, 1e-9);
  EXPECT_LE(r.max_intermediate_imbalance, 1e-9);
}

}  // namespace
}  // namespace flowrec
