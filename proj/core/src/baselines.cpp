#include "flowrec/baselines.hpp"

#include "flowrec/error.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

namespace flowrec {

Vector reconcile_bottom_up(const Vector& yhat, const FlowAggregationMatrix& s) {
  if (static_cast<std::size_t>(yhat.size()) != s.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "forecast length does not match n");
  }
  return s.multiply(yhat.tail(static_cast<Eigen::Index>(s.num_paths())));
}

MintResult reconcile_mint_ols(const Vector& yhat, const FlowAggregationMatrix& s, bool nonneg) {
  ReconciliationResult base = reconcile_l2(yhat, s);
  MintResult out;
  out.y = std::move(base.y_tilde);
  out.stats = base.stats;
  out.stats.method = nonneg ? "mint-ols-nonneg" : "mint-ols";
  if (nonneg) {
    for (Eigen::Index i = 0; i < out.y.size(); ++i) {
      if (out.y[i] < 0.0) {
        out.y[i] = 0.0;
        ++out.clamped_components;
      }
    }
    out.coherence = check_coherence(out.y, s);
  } else {
    out.coherence = std::move(base.coherence);
  }
  return out;
}

ReconciliationResult reconcile_l2_dense(const Vector& yhat, const FlowAggregationMatrix& s) {
  if (static_cast<std::size_t>(yhat.size()) != s.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "forecast length does not match n");
  }
  const auto start = std::chrono::steady_clock::now();
  const Eigen::MatrixXd sd = s.dense();
  const Eigen::MatrixXd gram = sd.transpose() * sd;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SolveFailure, "dense normal equations are not positive definite");
  }
  ReconciliationResult r;
  r.stats.method = "l2-dense";
  r.b_tilde = llt.solve(sd.transpose() * yhat);
  r.y_tilde = sd * r.b_tilde;
  r.loss_value = (r.y_tilde - yhat).squaredNorm();
  r.coherence = check_coherence(r.y_tilde, s);
  r.certificate_kind = "orthogonality";
  r.certificate = (sd.transpose() * (yhat - r.y_tilde)).lpNorm<Eigen::Infinity>();
  r.stats.aux_bytes = static_cast<std::size_t>(sd.size() + 2 * gram.size()) * sizeof(double);
  r.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

const MethodMetrics& MetricsReport::at(const std::string& name) const {
  for (const MethodMetrics& m : methods) {
    if (m.name == name) return m;
  }
  throw Error(ErrorCode::BadParameter, "no metrics for method '" + name + "'");
}

namespace {

LevelMetrics level_metrics(const Vector& err) {
  LevelMetrics m;
  m.count = static_cast<std::size_t>(err.size());
  if (m.count == 0) return m;
  const double n = static_cast<double>(m.count);
  m.rmse = std::sqrt(err.squaredNorm() / n);
  m.mae = err.cwiseAbs().sum() / n;
  return m;
}

}  // namespace

MetricsReport evaluate(const std::vector<MethodOutput>& outputs, const Vector& truth,
                       const IndexMap& index) {
  if (static_cast<std::size_t>(truth.size()) != index.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "truth length does not match n");
  }
  const auto nv = static_cast<Eigen::Index>(index.size(ComponentKind::Node));
  const auto ne = static_cast<Eigen::Index>(index.size(ComponentKind::Edge));
  const auto np = static_cast<Eigen::Index>(index.size(ComponentKind::Path));
  MetricsReport report;
  for (const MethodOutput& o : outputs) {
    if (o.y.size() != truth.size()) {
      throw Error(ErrorCode::DimensionMismatch, "output of '" + o.name + "' has wrong length");
    }
    const Vector err = o.y - truth;
    MethodMetrics m;
    m.name = o.name;
    m.overall = level_metrics(err);
    m.nodes = level_metrics(err.head(nv));
    m.edges = level_metrics(err.segment(nv, ne));
    m.paths = level_metrics(err.tail(np));
    m.wall_seconds = o.wall_seconds;
    m.aux_bytes = o.aux_bytes;
    report.methods.push_back(std::move(m));
  }
  return report;
}

}  // namespace flowrec
