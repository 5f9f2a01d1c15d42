#include "flowrec/reconcile.hpp"

#include "flowrec/descent.hpp"
#include "flowrec/error.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace flowrec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_forecast(const Vector& yhat, const FlowAggregationMatrix& s) {
  if (static_cast<std::size_t>(yhat.size()) != s.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "forecast length " + std::to_string(yhat.size()) +
                                                  " does not match n = " +
                                                  std::to_string(s.rows()));
  }
  for (Eigen::Index i = 0; i < yhat.size(); ++i) {
    if (!std::isfinite(yhat[i])) {
      throw Error(ErrorCode::NonFinite, "forecast component " + std::to_string(i) +
                                            " is not finite");
    }
  }
}

void check_weights(const Vector& w, std::size_t n) {
  if (w.size() == 0) return;
  if (static_cast<std::size_t>(w.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "weight vector length does not match n");
  }
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw Error(ErrorCode::BadParameter,
                  "weight " + std::to_string(i) + " must be finite and >= 0");
    }
  }
}

std::vector<std::size_t> uncovered_rows(const FlowAggregationMatrix& s) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < s.num_nodes(); ++v) {
    if (s.vertex_path().row(v).empty()) out.push_back(v);
  }
  for (std::size_t e = 0; e < s.num_edges(); ++e) {
    if (s.edge_path().row(e).empty()) out.push_back(s.num_nodes() + e);
  }
  return out;
}

void finish(ReconciliationResult& r, const Vector& yhat, const FlowAggregationMatrix& s,
            const LossSpec& loss) {
  r.y_tilde = s.multiply(r.b_tilde);
  r.loss_value = loss_value(loss, yhat, r.y_tilde);
  r.coherence = check_coherence(r.y_tilde, s);
  r.uncovered = uncovered_rows(s);
}

}  // namespace

LossSpec LossSpec::l1() {
  LossSpec l;
  l.kind = LossKind::L1;
  return l;
}

LossSpec LossSpec::huber(double delta) {
  LossSpec l;
  l.kind = LossKind::Huber;
  l.delta = delta;
  return l;
}

LossSpec LossSpec::custom(std::function<double(double)> f, std::function<double(double)> df) {
  LossSpec l;
  l.kind = LossKind::Custom;
  l.f = std::move(f);
  l.df = std::move(df);
  return l;
}

void LossSpec::validate(std::size_t n) const {
  if (kind == LossKind::Huber && !(delta > 0.0)) {
    throw Error(ErrorCode::BadParameter, "huber delta must be > 0");
  }
  if (kind == LossKind::Custom && (!f || !df)) {
    throw Error(ErrorCode::BadParameter, "custom loss needs both f and f'");
  }
  check_weights(weights, n);
}

bool LossSpec::smooth() const {
  switch (kind) {
    case LossKind::L2:
    case LossKind::Huber:
      return true;
    case LossKind::L1:
      return false;
    case LossKind::Custom:
      return df && std::abs(df(0.0)) <= 1e-12;
  }
  return false;
}

double LossSpec::value(double u) const {
  const double a = std::abs(u);
  switch (kind) {
    case LossKind::L2: return a * a;
    case LossKind::L1: return a;
    case LossKind::Huber: return a <= delta ? 0.5 * a * a : delta * a - 0.5 * delta * delta;
    case LossKind::Custom: return f(a);
  }
  return 0.0;
}

double LossSpec::derivative(double u) const {
  const double a = std::abs(u);
  const double sign = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
  switch (kind) {
    case LossKind::L2: return 2.0 * u;
    case LossKind::L1: return sign;
    case LossKind::Huber: return a <= delta ? u : delta * sign;
    case LossKind::Custom: return sign * df(a);
  }
  return 0.0;
}

std::optional<LossSpec> parse_loss(std::string_view text) {
  if (text == "l2") return LossSpec::l2();
  if (text == "l1") return LossSpec::l1();
  constexpr std::string_view prefix = "huber:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string rest(text.substr(prefix.size()));
    std::size_t used = 0;
    double delta = 0.0;
    try {
      delta = std::stod(rest, &used);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (used != rest.size() || !(delta > 0.0) || !std::isfinite(delta)) return std::nullopt;
    return LossSpec::huber(delta);
  }
  return std::nullopt;
}

std::string describe(const LossSpec& loss) {
  switch (loss.kind) {
    case LossKind::L2: return "l2";
    case LossKind::L1: return "l1";
    case LossKind::Huber: {
      std::ostringstream os;
      os << "huber:" << loss.delta;
      return os.str();
    }
    case LossKind::Custom: return "custom";
  }
  return "unknown";
}

double loss_value(const LossSpec& loss, const Vector& yhat, const Vector& ytilde) {
  if (yhat.size() != ytilde.size()) {
    throw Error(ErrorCode::DimensionMismatch, "loss_value: vector lengths differ");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < yhat.size(); ++i) {
    total += loss.weight(static_cast<std::size_t>(i)) * loss.value(ytilde[i] - yhat[i]);
  }
  return total;
}

BoxConstraints BoxConstraints::unbounded(std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  return {Vector::Constant(nn, -std::numeric_limits<double>::infinity()),
          Vector::Constant(nn, std::numeric_limits<double>::infinity())};
}

void BoxConstraints::validate(std::size_t n) const {
  if (static_cast<std::size_t>(lower.size()) != n || static_cast<std::size_t>(upper.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "box bounds must have length n");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
      throw Error(ErrorCode::BadParameter, "box bound " + std::to_string(i) + " is empty");
    }
  }
}

ReconciliationResult reconcile_l2(const Vector& yhat, const FlowAggregationMatrix& s,
                                  const Vector& weights, L2Options options) {
  check_forecast(yhat, s);
  check_weights(weights, s.rows());
  const auto start = Clock::now();
  const auto np = static_cast<std::size_t>(s.num_paths());

  ReconciliationResult r;
  r.stats.method = weights.size() ? "l2-weighted" : "l2";
  try {
    const Vector w = weights.size() ? weights : Vector::Ones(static_cast<Eigen::Index>(s.rows()));
    const Vector rhs = s.transpose_multiply(w.cwiseProduct(yhat));
    const numerics::SpdSolveResult sol = numerics::solve_spd(
        [&](const Vector& x) { return s.weighted_gram_multiply(w, x); },
        s.weighted_gram_diagonal(w), rhs, {options.tol, 0});
    r.b_tilde = sol.x;
    r.stats.iterations = sol.iterations;
    r.stats.aux_bytes = (6 * np + 2 * s.rows()) * sizeof(double);
  } catch (const Error& e) {
    throw Error(ErrorCode::SolveFailure, std::string("normal equations: ") + e.what());
  }
  LossSpec loss;
  loss.weights = weights;
  finish(r, yhat, s, loss);
  const Vector resid = yhat - r.y_tilde;
  r.certificate_kind = "orthogonality";
  r.certificate = s.transpose_multiply(weights.size() ? Vector(weights.cwiseProduct(resid))
                                                      : resid)
                      .lpNorm<Eigen::Infinity>();
  r.stats.wall_seconds = seconds_since(start);
  return r;
}

Eigen::MatrixXd coherence_constraints(const FlowAggregationMatrix& s) {
  const auto k = static_cast<Eigen::Index>(s.num_nodes() + s.num_edges());
  const auto np = static_cast<Eigen::Index>(s.num_paths());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k + np);
  a.leftCols(k).setIdentity();
  Eigen::Index row = 0;
  for (const CsrPattern* block : {&s.vertex_path(), &s.edge_path()}) {
    for (std::size_t r = 0; r < block->rows; ++r, ++row) {
      for (std::size_t p : block->row(r)) a(row, k + static_cast<Eigen::Index>(p)) = -1.0;
    }
  }
  return a;
}

Vector reconcile_weighted(const Vector& yhat, const Eigen::MatrixXd& a, const Vector& c,
                          const Eigen::MatrixXd& w, const std::optional<BoxConstraints>& box) {
  if (box) {
    throw Error(ErrorCode::BadParameter, "the closed-form weighted solve does not take a box");
  }
  const Eigen::Index n = yhat.size();
  if (a.cols() != n || c.size() != a.rows() || w.rows() != n || w.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "reconcile_weighted: inconsistent dimensions");
  }
  if (!yhat.allFinite() || !a.allFinite() || !c.allFinite() || !w.allFinite()) {
    throw Error(ErrorCode::NonFinite, "reconcile_weighted: non-finite input");
  }
  const double wscale = std::max(w.cwiseAbs().maxCoeff(), 1e-300);
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * wscale) {
    throw Error(ErrorCode::NotSpd, "weight matrix is not symmetric");
  }
  const Eigen::LLT<Eigen::MatrixXd> wllt(w);
  if (wllt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotSpd, "weight matrix is not positive definite");
  }
  const Eigen::MatrixXd winv_at = wllt.solve(a.transpose());
  const Eigen::MatrixXd m = a * winv_at;
  const Eigen::LDLT<Eigen::MatrixXd> mldlt(m);
  const Vector d = mldlt.vectorD().cwiseAbs();
  if (mldlt.info() != Eigen::Success || d.size() == 0 ||
      d.minCoeff() <= 1e-12 * std::max(d.maxCoeff(), 1e-300)) {
    throw Error(ErrorCode::RankDeficient, "constraint matrix does not have full row rank");
  }
  return yhat - winv_at * mldlt.solve(a * yhat - c);
}

ReconciliationResult reconcile_l1(const Vector& yhat, const FlowAggregationMatrix& s,
                                  const std::optional<BoxConstraints>& box,
                                  const Vector& weights, numerics::LpOptions lp_options) {
  check_forecast(yhat, s);
  check_weights(weights, s.rows());
  if (box) box->validate(s.rows());
  const auto start = Clock::now();
  const auto n = static_cast<Eigen::Index>(s.rows());
  const auto np = static_cast<Eigen::Index>(s.num_paths());
  const Eigen::MatrixXd sd = s.dense();

  std::vector<Eigen::Index> lower_rows;
  std::vector<Eigen::Index> upper_rows;
  if (box) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isfinite(box->lower[i])) lower_rows.push_back(i);
      if (std::isfinite(box->upper[i])) upper_rows.push_back(i);
    }
  }
  const Eigen::Index rows =
      2 * n + static_cast<Eigen::Index>(lower_rows.size() + upper_rows.size());

  numerics::LpProblem lp;
  lp.objective = Vector::Zero(np + n);
  lp.objective.tail(n) = weights.size() ? weights : Vector::Ones(n);
  lp.constraints = Eigen::MatrixXd::Zero(rows, np + n);
  lp.rhs = Vector::Zero(rows);
  lp.lower = Vector::Zero(np + n);
  lp.lower.head(np).setConstant(-std::numeric_limits<double>::infinity());
  lp.relations.assign(static_cast<std::size_t>(rows), numerics::Relation::GreaterEqual);
  for (Eigen::Index i = 0; i < n; ++i) {
    // s_i - (S b)_i >= -yhat_i and s_i + (S b)_i >= yhat_i
    lp.constraints.row(2 * i).head(np) = -sd.row(i);
    lp.constraints(2 * i, np + i) = 1.0;
    lp.rhs[2 * i] = -yhat[i];
    lp.constraints.row(2 * i + 1).head(np) = sd.row(i);
    lp.constraints(2 * i + 1, np + i) = 1.0;
    lp.rhs[2 * i + 1] = yhat[i];
  }
  Eigen::Index row = 2 * n;
  for (Eigen::Index i : lower_rows) {
    lp.constraints.row(row).head(np) = sd.row(i);
    lp.rhs[row++] = box->lower[i];
  }
  for (Eigen::Index i : upper_rows) {
    lp.constraints.row(row).head(np) = sd.row(i);
    lp.relations[static_cast<std::size_t>(row)] = numerics::Relation::LessEqual;
    lp.rhs[row++] = box->upper[i];
  }

  numerics::LpSolution sol;
  try {
    sol = numerics::solve_lp(lp, lp_options);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Infeasible) throw;
    throw Error(ErrorCode::SolveFailure, std::string("l1 linear program: ") + e.what());
  }

  ReconciliationResult r;
  r.stats.method = "l1";
  r.stats.iterations = sol.pivots;
  r.stats.aux_bytes = sol.tableau_bytes + static_cast<std::size_t>(sd.size()) * sizeof(double) +
                      static_cast<std::size_t>(lp.constraints.size()) * sizeof(double);
  r.b_tilde = sol.x.head(np);
  LossSpec loss = LossSpec::l1();
  loss.weights = weights;
  finish(r, yhat, s, loss);
  r.certificate_kind = "duality_gap";
  r.certificate = sol.duality_gap;
  r.stats.wall_seconds = seconds_since(start);
  return r;
}

ReconciliationResult reconcile_general(const Vector& yhat, const FlowAggregationMatrix& s,
                                       const LossSpec& loss, GeneralOptions options) {
  check_forecast(yhat, s);
  loss.validate(s.rows());
  if (!loss.smooth()) {
    throw Error(ErrorCode::NonSmoothLoss,
                "loss '" + describe(loss) + "' is not differentiable at 0; use the l1 solver");
  }
  const auto start = Clock::now();
  const auto nv = static_cast<Eigen::Index>(s.num_nodes());
  const auto ne = static_cast<Eigen::Index>(s.num_edges());
  const auto np = static_cast<Eigen::Index>(s.num_paths());

  numerics::DescentOptions dopt;
  dopt.tol = options.tol;
  dopt.max_iterations = options.max_iterations;
  if (options.box) {
    options.box->validate(s.rows());
    const BoxConstraints& box = *options.box;
    for (Eigen::Index i = 0; i < nv + ne; ++i) {
      if (std::isfinite(box.lower[i]) || std::isfinite(box.upper[i])) {
        throw Error(ErrorCode::BadParameter,
                    "smooth-loss reconciliation supports path-level bounds only (component " +
                        std::to_string(i) + ")");
      }
    }
    dopt.lower = box.lower.tail(np);
    dopt.upper = box.upper.tail(np);
  }

  Vector x0;
  if (options.start) {
    if (options.start->size() != np) {
      throw Error(ErrorCode::DimensionMismatch, "start vector must have length |P|");
    }
    x0 = *options.start;
  } else {
    x0 = reconcile_l2(yhat, s).b_tilde;
  }

  const numerics::SmoothObjective objective = [&](const Vector& b, Vector* grad) {
    const Vector resid = s.multiply(b) - yhat;
    double value = 0.0;
    Vector dr(resid.size());
    for (Eigen::Index i = 0; i < resid.size(); ++i) {
      const double w = loss.weight(static_cast<std::size_t>(i));
      value += w * loss.value(resid[i]);
      dr[i] = w * loss.derivative(resid[i]);
    }
    if (grad) *grad = s.transpose_multiply(dr);
    return value;
  };

  numerics::DescentResult sol;
  try {
    sol = numerics::minimize_smooth_convex(objective, x0, dopt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoConvergence) throw;
    throw Error(ErrorCode::SolveFailure, std::string("descent: ") + e.what());
  }

  ReconciliationResult r;
  r.stats.method = describe(loss);
  r.stats.iterations = sol.iterations;
  r.stats.aux_bytes = static_cast<std::size_t>(6 * np + 3 * (nv + ne + np)) * sizeof(double);
  r.b_tilde = sol.x;
  finish(r, yhat, s, loss);
  r.certificate_kind = "gradient_norm";
  r.certificate = sol.gradient_norm;
  r.stats.wall_seconds = seconds_since(start);
  return r;
}

ReconciliationResult reconcile(const Vector& yhat, const FlowAggregationMatrix& s,
                               const LossSpec& loss, const std::optional<BoxConstraints>& box) {
  loss.validate(s.rows());
  if (loss.kind == LossKind::L1) return reconcile_l1(yhat, s, box, loss.weights);
  if (loss.kind == LossKind::L2 && !box) return reconcile_l2(yhat, s, loss.weights);
  GeneralOptions opt;
  opt.box = box;
  return reconcile_general(yhat, s, loss, opt);
}

}  // namespace flowrec
