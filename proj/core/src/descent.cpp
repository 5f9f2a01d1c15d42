#include "flowrec/descent.hpp"

#include "flowrec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace flowrec::numerics {

namespace {

class Box {
 public:
  Box(const Vector& lower, const Vector& upper, Eigen::Index n) {
    if ((lower.size() != 0 && lower.size() != n) || (upper.size() != 0 && upper.size() != n)) {
      throw Error(ErrorCode::DimensionMismatch, "box bounds do not match the variable count");
    }
    lower_ = lower.size() ? lower
                          : Vector::Constant(n, -std::numeric_limits<double>::infinity());
    upper_ = upper.size() ? upper
                          : Vector::Constant(n, std::numeric_limits<double>::infinity());
    active_ = lower.size() != 0 || upper.size() != 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isnan(lower_[i]) || std::isnan(upper_[i]) || lower_[i] > upper_[i]) {
        throw Error(ErrorCode::BadParameter, "box bound " + std::to_string(i) + " is empty");
      }
    }
  }

  bool active() const noexcept { return active_; }
  Vector project(const Vector& x) const {
    return active_ ? Vector(x.cwiseMax(lower_).cwiseMin(upper_)) : x;
  }

 private:
  Vector lower_;
  Vector upper_;
  bool active_ = false;
};

}  // namespace

DescentResult minimize_smooth_convex(const SmoothObjective& f, Vector x0,
                                     const DescentOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::BadParameter, "tolerance must be positive");
  if (!(options.shrink > 0.0 && options.shrink < 1.0) ||
      !(options.armijo_c > 0.0 && options.armijo_c < 1.0)) {
    throw Error(ErrorCode::BadParameter, "line-search parameters out of range");
  }
  const Box box(options.lower, options.upper, x0.size());

  DescentResult out;
  out.x = box.project(x0);
  Vector g(out.x.size());
  out.value = f(out.x, &g);
  ++out.evaluations;
  if (!std::isfinite(out.value) || !g.allFinite()) {
    throw Error(ErrorCode::NonFinite, "objective is not finite at the starting point");
  }

  auto stationarity = [&](const Vector& x, const Vector& grad) {
    return box.active() ? (x - box.project(x - grad)).norm() : grad.norm();
  };

  // Limited-memory BFGS pairs; used only without a box, where the projected
  // Barzilai-Borwein step takes over.
  constexpr std::size_t kMemory = 10;
  std::vector<Vector> s_hist;
  std::vector<Vector> y_hist;
  Vector x_prev;
  Vector g_prev;
  Vector g_new(out.x.size());
  for (std::size_t it = 0;; ++it) {
    out.gradient_norm = stationarity(out.x, g);
    out.iterations = it;
    if (out.gradient_norm <= options.tol * (1.0 + std::abs(out.value))) return out;
    if (it >= options.max_iterations) {
      throw Error(ErrorCode::NoConvergence,
                  "descent stopped after " + std::to_string(it) +
                      " iterations with gradient norm " + std::to_string(out.gradient_norm));
    }

    Vector direction = -g;
    double t = 1.0;
    if (!box.active() && !s_hist.empty()) {
      Vector q = g;
      std::vector<double> alpha(s_hist.size());
      for (std::size_t i = s_hist.size(); i-- > 0;) {
        alpha[i] = s_hist[i].dot(q) / y_hist[i].dot(s_hist[i]);
        q -= alpha[i] * y_hist[i];
      }
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      for (std::size_t i = 0; i < s_hist.size(); ++i) {
        const double beta = y_hist[i].dot(q) / y_hist[i].dot(s_hist[i]);
        q += (alpha[i] - beta) * s_hist[i];
      }
      if (q.dot(g) > 0.0) {
        direction = -q;
      } else {
        s_hist.clear();
        y_hist.clear();
      }
    } else if (x_prev.size() != 0) {
      const Vector s = out.x - x_prev;
      const Vector y = g - g_prev;
      const double sy = s.dot(y);
      if (sy > 0.0) t = s.squaredNorm() / sy;
    }

    bool accepted = false;
    Vector x_new;
    double f_new = 0.0;
    for (int k = 0; k < 200; ++k) {
      x_new = box.project(out.x + t * direction);
      const Vector step = x_new - out.x;
      if (step.squaredNorm() == 0.0) break;
      f_new = f(x_new, &g_new);
      ++out.evaluations;
      if (!std::isfinite(f_new)) {
        t *= options.shrink;
        continue;
      }
      const double slope = g.dot(step);
      const bool armijo = f_new <= out.value + options.armijo_c * slope;
      // Near the optimum the value test drowns in rounding; fall back to the
      // equivalent slope test (approximate Wolfe).
      const bool approx = f_new <= out.value + 1e-12 * (1.0 + std::abs(out.value)) &&
                          g_new.dot(step) <= (2.0 * options.armijo_c - 1.0) * slope;
      if (armijo || approx) {
        accepted = true;
        break;
      }
      t *= options.shrink;
    }
    if (!accepted) {
      throw Error(ErrorCode::NoConvergence,
                  "line search stalled at gradient norm " + std::to_string(out.gradient_norm));
    }
    x_prev = std::move(out.x);
    g_prev = g;
    out.x = std::move(x_new);
    out.value = f_new;
    g = g_new;
    if (!box.active()) {
      Vector s = out.x - x_prev;
      Vector y = g - g_prev;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        if (s_hist.size() == kMemory) {
          s_hist.erase(s_hist.begin());
          y_hist.erase(y_hist.begin());
        }
        s_hist.push_back(std::move(s));
        y_hist.push_back(std::move(y));
      }
    }
  }
}

}  // namespace flowrec::numerics
