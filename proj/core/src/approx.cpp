#include "flowrec/approx.hpp"

#include "flowrec/error.hpp"

#include <chrono>
#include <cmath>

namespace flowrec {

namespace {

struct Blocks {
  Eigen::Index nv;
  Eigen::Index ne;
  Eigen::Index np;
};

// With the slack eliminated (r = clamp(E' b - yhat_E)), the objective in b is
// |V'b - yhat_V|^2 + |b - yhat_P|^2 + sum_e (|u_e| - eps)_+^2, u = E'b - yhat_E.
struct Evaluation {
  double value = 0.0;
  Vector gradient;
  Vector excess;
  std::vector<bool> active;
};

Evaluation evaluate(const FlowAggregationMatrix& s, const Blocks& k, const Vector& yhat,
                    double epsilon, const Vector& b) {
  Vector resid = s.multiply(b) - yhat;
  Evaluation ev;
  ev.active.assign(static_cast<std::size_t>(k.ne), false);
  ev.excess = Vector::Zero(k.ne);
  for (Eigen::Index e = 0; e < k.ne; ++e) {
    const double u = resid[k.nv + e];
    if (std::abs(u) > epsilon) {
      ev.excess[e] = u > 0 ? u - epsilon : u + epsilon;
      ev.active[static_cast<std::size_t>(e)] = true;
    }
    resid[k.nv + e] = ev.excess[e];
  }
  ev.value = resid.squaredNorm();
  ev.gradient = 2.0 * s.transpose_multiply(resid);
  return ev;
}

}  // namespace

RelaxedResult reconcile_relaxed(const Vector& yhat, const FlowAggregationMatrix& s,
                                double epsilon, RelaxedOptions options) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::BadParameter, "epsilon must be a positive finite number");
  }
  if (static_cast<std::size_t>(yhat.size()) != s.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "forecast length does not match n");
  }
  if (!yhat.allFinite()) throw Error(ErrorCode::NonFinite, "forecast is not finite");
  if (options.exact && options.exact->size() != yhat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "exact solution length does not match n");
  }
  const auto start = std::chrono::steady_clock::now();
  const Blocks k{static_cast<Eigen::Index>(s.num_nodes()),
                 static_cast<Eigen::Index>(s.num_edges()),
                 static_cast<Eigen::Index>(s.num_paths())};

  RelaxedResult out;
  out.epsilon = epsilon;
  Vector b = yhat.tail(k.np);
  Evaluation ev = evaluate(s, k, yhat, epsilon, b);
  const double scale = 1.0 + yhat.norm();
  Vector w = Vector::Ones(static_cast<Eigen::Index>(s.rows()));
  for (std::size_t it = 1;; ++it) {
    if (it > options.max_iterations) {
      throw Error(ErrorCode::NoConvergence, "relaxed reconciliation did not converge in " +
                                                std::to_string(options.max_iterations) +
                                                " iterations");
    }
    for (Eigen::Index e = 0; e < k.ne; ++e) w[k.nv + e] = ev.active[static_cast<std::size_t>(e)];
    Vector step;
    try {
      step = numerics::solve_spd([&](const Vector& x) { return s.weighted_gram_multiply(w, x); },
                                 s.weighted_gram_diagonal(w), -0.5 * ev.gradient)
                 .x;
    } catch (const Error& err) {
      throw Error(ErrorCode::NoConvergence, std::string("relaxed Newton step failed: ") + err.what());
    }
    double alpha = 1.0;
    Evaluation next;
    const double slope = ev.gradient.dot(step);
    for (int shrink = 0;; ++shrink) {
      next = evaluate(s, k, yhat, epsilon, b + alpha * step);
      if (next.value <= ev.value + 1e-4 * alpha * slope ||
          next.value <= ev.value + 1e-13 * (1.0 + ev.value)) {
        break;
      }
      if (shrink == 60) {
        throw Error(ErrorCode::NoConvergence, "relaxed line search stalled");
      }
      alpha *= 0.5;
    }
    b += alpha * step;
    const bool same_pieces = next.active == ev.active;
    ev = std::move(next);
    out.iterations = it;
    // A full step that stays on the same quadratic piece lands on its minimizer.
    if ((alpha == 1.0 && same_pieces) || ev.gradient.norm() <= options.tol * scale) break;
  }

  out.b = b;
  out.y_eps = s.multiply(b);
  const Vector u = out.y_eps.segment(k.nv, k.ne) - yhat.segment(k.nv, k.ne);
  const Vector r = u.cwiseMax(-epsilon).cwiseMin(epsilon);
  out.y_eps.segment(k.nv, k.ne) -= r;
  out.edge_violations = r.cwiseAbs();
  out.max_violation = k.ne ? out.edge_violations.maxCoeff() : 0.0;
  out.objective = (out.y_eps - yhat).squaredNorm();
  if (options.exact) out.deviation = (out.y_eps - *options.exact).norm();
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace flowrec
