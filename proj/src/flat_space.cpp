#include "gci/flat_space.hpp"

namespace gci {

namespace {

void validate_weighted_input(const MetricSpace& sp, const std::vector<Vec>& pts,
                             const Vec& w) {
  if (pts.empty()) {
    throw Error(Errc::degenerate_data, "weighted_mean: empty point list");
  }
  if (static_cast<Index>(pts.size()) != w.size()) {
    throw Error(Errc::shape_mismatch, "weighted_mean: points/weights length mismatch");
  }
  if (!w.allFinite()) {
    throw Error(Errc::invalid_argument, "weighted_mean: non-finite weights");
  }
  if (w.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(Errc::degenerate_data, "weighted_mean: all weights are zero");
  }
  for (const Vec& p : pts) sp.check_dim(p, "weighted_mean: point");
}

}  // namespace

Vec FlatSpace::weighted_mean(const std::vector<Vec>& pts, const Vec& w,
                             const SolverOptions& opt, SolverDiagnostics* diag) const {
  validate_weighted_input(*this, pts, w);
  const Index n = static_cast<Index>(pts.size());
  const Index d = ambient_dim();
  const double wsum = w.sum();
  const double wabs = w.cwiseAbs().sum();
  const double scale2 = metric_scale() * metric_scale();

  Vec moment = Vec::Zero(d);  // sum_i w_i y_i
  for (Index i = 0; i < n; ++i) moment += w[i] * pts[static_cast<std::size_t>(i)];

  const auto objective = [&](const Vec& nu) {
    double f = 0.0;
    for (Index i = 0; i < n; ++i) {
      f += w[i] * (nu - pts[static_cast<std::size_t>(i)]).squaredNorm();
    }
    return scale2 * f;
  };

  // Positive total weight: the minimizer over a convex set is the projected
  // weighted average (the objective equals sum(w)|nu - avg|^2 + const).
  if (wsum > 1e-12 * wabs) {
    Vec avg = moment / wsum;
    if (!contains(avg)) avg = project(avg);
    if (diag) {
      diag->iterations = 0;
      diag->converged = true;
      diag->objective = objective(avg);
      if (opt.record_history) diag->history = {diag->objective};
    }
    return avg;
  }

  // Non-positive total weight: projected gradient descent with backtracking.
  // The objective may be concave; we settle on a stationary/boundary point and
  // guard against divergence on effectively unbounded feasible sets.
  double point_scale = 1.0;
  Vec nu = Vec::Zero(d);
  {
    Vec abs_avg = Vec::Zero(d);
    for (Index i = 0; i < n; ++i) {
      abs_avg += std::abs(w[i]) * pts[static_cast<std::size_t>(i)];
      point_scale = std::max(point_scale, pts[static_cast<std::size_t>(i)].norm());
    }
    abs_avg /= wabs;
    nu = contains(abs_avg) ? abs_avg : project(abs_avg);
  }

  double f = objective(nu);
  Vec best = nu;
  double best_f = f;
  const double alpha0 = 1.0 / (2.0 * std::max(std::abs(wsum), 1e-12 * wabs));
  int iter = 0;
  bool converged = false;
  if (diag && opt.record_history) diag->history = {f};

  for (; iter < opt.max_iters; ++iter) {
    const Vec grad = scale2 * 2.0 * (wsum * nu - moment);
    bool improved = false;
    double alpha = alpha0;
    for (int ls = 0; ls < 60; ++ls) {
      Vec cand = nu - alpha * grad;
      if (!contains(cand)) cand = project(cand);
      const double fc = objective(cand);
      if (fc < f - 1e-12 * (1.0 + std::abs(f))) {
        nu = cand;
        const double prev = f;
        f = fc;
        improved = true;
        if (f < best_f) {
          best = nu;
          best_f = f;
        }
        if (diag && opt.record_history) diag->history.push_back(f);
        if (prev - f <= opt.obj_tol * (1.0 + std::abs(f))) {
          converged = true;
        }
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      converged = true;  // no feasible descent: stationary for this problem
      break;
    }
    if (converged) break;
    if (nu.norm() > 1e9 * (1.0 + point_scale)) {
      throw ConvergenceError("weighted_mean: non-positive total weight drives the "
                             "iterate unbounded", best, iter);
    }
  }
  if (!converged) {
    throw ConvergenceError("weighted_mean: projected gradient descent did not settle",
                           best, iter);
  }
  if (diag) {
    diag->iterations = iter;
    diag->converged = true;
    diag->objective = best_f;
  }
  return best;
}

}  // namespace gci
