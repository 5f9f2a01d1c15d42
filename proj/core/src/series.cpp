#include "flowrec/series.hpp"

#include "flowrec/error.hpp"

#include <algorithm>
#include <cmath>

namespace flowrec {

ForecastVector::ForecastVector(Vector values, int horizon, std::int64_t origin)
    : values_(std::move(values)), horizon_(horizon), origin_(origin) {
  if (horizon_ < 1) throw Error(ErrorCode::BadParameter, "horizon must be >= 1");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFinite, "forecast entry " + std::to_string(i) + " is not finite");
    }
  }
}

HierarchicalSeries::HierarchicalSeries(std::vector<std::int64_t> timestamps,
                                       std::vector<Vector> values)
    : timestamps_(std::move(timestamps)), values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::EmptySeries, "series has no observations");
  if (timestamps_.size() != values_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "timestamp and observation counts differ");
  }
  const auto n = values_.front().size();
  for (std::size_t t = 0; t < values_.size(); ++t) {
    if (values_[t].size() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "observation " + std::to_string(t) + " has a different length");
    }
    if (!values_[t].allFinite()) {
      throw Error(ErrorCode::NonFinite, "observation " + std::to_string(t) + " is not finite");
    }
    if (t > 0 && timestamps_[t] <= timestamps_[t - 1]) {
      throw Error(ErrorCode::BadParameter, "timestamps must be strictly increasing");
    }
  }
}

double default_coherence_tolerance(const Vector& y) noexcept {
  return 1e-8 * (1.0 + (y.size() ? y.lpNorm<Eigen::Infinity>() : 0.0));
}

CoherenceReport check_coherence(const Vector& y, const FlowAggregationMatrix& s, double tol) {
  if (static_cast<std::size_t>(y.size()) != s.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "forecast length " + std::to_string(y.size()) +
                                                  " does not match n = " +
                                                  std::to_string(s.rows()));
  }
  if (!(tol >= 0.0)) throw Error(ErrorCode::BadParameter, "tolerance must be >= 0");
  const auto nv = static_cast<Eigen::Index>(s.num_nodes());
  const auto ne = static_cast<Eigen::Index>(s.num_edges());
  const auto np = static_cast<Eigen::Index>(s.num_paths());
  const Vector agg = s.multiply(y.tail(np));
  CoherenceReport r;
  r.node_residuals = (agg.head(nv) - y.head(nv)).cwiseAbs();
  r.edge_residuals = (agg.segment(nv, ne) - y.segment(nv, ne)).cwiseAbs();
  r.max_node_residual = nv ? r.node_residuals.maxCoeff() : 0.0;
  r.max_edge_residual = ne ? r.edge_residuals.maxCoeff() : 0.0;
  r.tolerance = tol;
  r.coherent = r.max_node_residual <= tol && r.max_edge_residual <= tol;
  return r;
}

CoherenceReport check_coherence(const Vector& y, const FlowAggregationMatrix& s) {
  return check_coherence(y, s, default_coherence_tolerance(y));
}

Vector aggregate_bottom(const Vector& b, const FlowAggregationMatrix& s) {
  if (static_cast<std::size_t>(b.size()) != s.num_paths()) {
    throw Error(ErrorCode::DimensionMismatch, "bottom vector length " +
                                                  std::to_string(b.size()) +
                                                  " does not match |P| = " +
                                                  std::to_string(s.num_paths()));
  }
  return s.multiply(b);
}

Vector node_supplies(const Vector& y, const Network& net) {
  if (static_cast<std::size_t>(y.size()) != net.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "forecast length does not match the network");
  }
  const std::size_t off = net.index().offset(ComponentKind::Path);
  Vector supply = Vector::Zero(static_cast<Eigen::Index>(net.num_nodes()));
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    const double v = y[static_cast<Eigen::Index>(off + p)];
    supply[static_cast<Eigen::Index>(net.origin(p))] += v;
    supply[static_cast<Eigen::Index>(net.destination(p))] -= v;
  }
  return supply;
}

ConservationReport check_conservation(const Vector& y, const Network& net) {
  ConservationReport r;
  r.supply = node_supplies(y, net);
  const std::size_t off = net.index().offset(ComponentKind::Edge);
  r.net_outflow = Vector::Zero(static_cast<Eigen::Index>(net.num_nodes()));
  for (std::size_t e = 0; e < net.num_edges(); ++e) {
    const double v = y[static_cast<Eigen::Index>(off + e)];
    const EdgeEnds ends = net.edge(e);
    r.net_outflow[static_cast<Eigen::Index>(ends.tail)] += v;
    r.net_outflow[static_cast<Eigen::Index>(ends.head)] -= v;
  }
  for (std::size_t v = 0; v < net.num_nodes(); ++v) {
    const auto vi = static_cast<Eigen::Index>(v);
    r.max_supply_mismatch =
        std::max(r.max_supply_mismatch, std::abs(r.net_outflow[vi] - r.supply[vi]));
    if (net.role(v) == NodeRole::Intermediate) {
      r.max_intermediate_imbalance =
          std::max(r.max_intermediate_imbalance, std::abs(r.net_outflow[vi]));
    }
  }
  return r;
}

}  // namespace flowrec
