#pragma once

#include "flowrec/network.hpp"
#include "flowrec/sparse.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace flowrec {

/// Finite length-n vector in IndexMap order with its horizon and origin.
class ForecastVector {
 public:
  ForecastVector() = default;
  /// Throws NonFinite on NaN/inf entries and BadParameter for horizon < 1.
  explicit ForecastVector(Vector values, int horizon = 1, std::int64_t origin = 0);

  const Vector& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  int horizon() const noexcept { return horizon_; }
  std::int64_t origin() const noexcept { return origin_; }

 private:
  Vector values_;
  int horizon_ = 1;
  std::int64_t origin_ = 0;
};

/// Observations of all n components at strictly increasing time indices.
class HierarchicalSeries {
 public:
  HierarchicalSeries() = default;
  /// Throws EmptySeries, DimensionMismatch, NonFinite or BadParameter
  /// (timestamps not strictly increasing).
  HierarchicalSeries(std::vector<std::int64_t> timestamps, std::vector<Vector> values);

  std::size_t length() const noexcept { return timestamps_.size(); }
  std::size_t dimension() const noexcept {
    return values_.empty() ? 0 : static_cast<std::size_t>(values_.front().size());
  }
  const std::vector<std::int64_t>& timestamps() const noexcept { return timestamps_; }
  const std::vector<Vector>& values() const noexcept { return values_; }
  const Vector& at(std::size_t t) const { return values_.at(t); }

 private:
  std::vector<std::int64_t> timestamps_;
  std::vector<Vector> values_;
};

struct CoherenceReport {
  /// |sum_{P on e} y_P - y_e| per edge and |sum_{P on v} y_P - y_v| per node.
  Vector edge_residuals;
  Vector node_residuals;
  double max_edge_residual = 0.0;
  double max_node_residual = 0.0;
  double tolerance = 0.0;
  bool coherent = true;
};

/// 1e-8 * (1 + max |y_i|).
double default_coherence_tolerance(const Vector& y) noexcept;

/// Throws DimensionMismatch or BadParameter (negative tolerance).
CoherenceReport check_coherence(const Vector& y, const FlowAggregationMatrix& s, double tol);
CoherenceReport check_coherence(const Vector& y, const FlowAggregationMatrix& s);

/// S b for path values b.
Vector aggregate_bottom(const Vector& b, const FlowAggregationMatrix& s);

/// Supply of each node implied by the path values of y:
/// flow starting at v minus flow ending at v.
Vector node_supplies(const Vector& y, const Network& net);

struct ConservationReport {
  /// Outflow minus inflow over edge values, per node.
  Vector net_outflow;
  /// Supply implied by the path values (see node_supplies).
  Vector supply;
  /// max_v |net_outflow_v - supply_v|.
  double max_supply_mismatch = 0.0;
  /// max |net_outflow_v| over nodes with role intermediate (0 when roles are absent).
  double max_intermediate_imbalance = 0.0;
};

ConservationReport check_conservation(const Vector& y, const Network& net);

}  // namespace flowrec
