#include "gci/sphere_space.hpp"

#include <algorithm>

namespace gci {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

double sphere_objective(const Mat& p, const Vec& w, const Vec& nu) {
  const Vec dots = p * nu;
  double f = 0.0;
  for (Index i = 0; i < dots.size(); ++i) {
    const double th = std::acos(clamp_unit(dots[i]));
    f += w[i] * th * th;
  }
  return f;
}

struct GdRun {
  Vec nu;
  double f = kInf;
  int iters = 0;
  bool converged = false;
  std::vector<double> history;
};

// Riemannian gradient descent on the orthant: the negative gradient of
// F(nu) = sum_i w_i d^2(nu, Y_i) is 2 sum_i w_i log_nu(Y_i); steps follow the
// exponential map with Armijo backtracking, clamping back into the orthant and
// renormalizing. Stops on a small gradient or an objective stall.
GdRun run_descent(const Mat& p, const Vec& w, Vec nu, const SolverOptions& opt) {
  const Index n = p.rows();
  const double wabs = std::max(w.cwiseAbs().sum(), 1e-300);
  GdRun run;
  double f = sphere_objective(p, w, nu);
  if (opt.record_history) run.history.push_back(f);

  int iter = 0;
  bool converged = false;
  Vec c(n);
  for (; iter < opt.max_iters; ++iter) {
    const Vec dots = (p * nu).cwiseMin(1.0).cwiseMax(-1.0);
    for (Index i = 0; i < n; ++i) {
      const double th = std::acos(dots[i]);
      c[i] = th < 1e-8 ? w[i] : w[i] * th / std::sin(th);
    }
    Vec g = p.transpose() * c - dots.dot(c) * nu;  // sum_i w_i log_nu(Y_i)
    g -= g.dot(nu) * nu;
    const double gn = g.norm();
    if (gn <= opt.grad_tol * wabs) {
      converged = true;
      break;
    }
    const Vec dir = g / wabs;
    const double dir_norm = gn / wabs;
    bool improved = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      const double arc = alpha * dir_norm;
      if (arc < 1e-300) break;
      Vec cand = std::cos(arc) * nu + std::sin(arc) * (dir / dir_norm);
      if ((cand.array() < 0.0).any()) cand = cand.cwiseMax(0.0);
      const double cn = cand.norm();
      if (cn < 1e-12) {
        alpha *= 0.5;
        continue;
      }
      cand /= cn;
      const double fc = sphere_objective(p, w, cand);
      if (fc <= f - 1e-4 * alpha * 2.0 * gn * gn / wabs) {
        const double prev = f;
        nu = cand;
        f = fc;
        improved = true;
        if (opt.record_history) run.history.push_back(f);
        if (prev - f <= 1e-13 * (1.0 + std::abs(f))) converged = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      converged = true;  // no descent direction survives backtracking
      break;
    }
    if (converged) break;
  }
  run.nu = std::move(nu);
  run.f = f;
  run.iters = iter;
  run.converged = converged;
  return run;
}

}  // namespace

SphereSpace::SphereSpace(Index d) : d_(d) {
  if (d < 2) throw Error(Errc::invalid_argument, "SphereSpace: d must be >= 2");
}

double SphereSpace::distance(const Vec& a, const Vec& b) const {
  check_dim(a, "distance: a");
  check_dim(b, "distance: b");
  return std::acos(clamp_unit(a.dot(b)));
}

bool SphereSpace::contains(const Vec& y, double tol) const {
  if (y.size() != d_ || !y.allFinite()) return false;
  if (std::abs(y.norm() - 1.0) > tol) return false;
  return y.minCoeff() >= -tol;
}

Vec SphereSpace::project(const Vec& y) const {
  check_dim(y, "project");
  if (!y.allFinite()) throw Error(Errc::invalid_argument, "project: non-finite entries");
  if (contains(y)) return y;
  Vec x = y.cwiseMax(0.0);
  const double n = x.norm();
  if (n < 1e-12) {
    throw Error(Errc::infeasible_point,
                "project: no nonnegative direction (zero after clamping)");
  }
  return x / n;
}

Vec SphereSpace::geodesic_point(const Vec& a, const Vec& b, double s) const {
  const double dot = clamp_unit(a.dot(b));
  Vec u = b - dot * a;
  const double un = u.norm();
  if (un < 1e-14) {
    throw Error(Errc::degenerate_geodesic,
                dot > 0.0 ? "geodesic_point: identical endpoints"
                          : "geodesic_point: antipodal endpoints");
  }
  const double theta = std::acos(dot);
  Vec out = std::cos(theta * s) * a + std::sin(theta * s) * (u / un);
  return out / out.norm();
}

double SphereSpace::extension_horizon(const Vec& a, const Vec& b) const {
  const double theta = std::acos(clamp_unit(a.dot(b)));
  if (theta < 1e-300) return kInf;
  return kPi / theta;
}

Vec SphereSpace::exp_map(const Vec& p, const Vec& v) const {
  check_dim(p, "exp_map: p");
  check_dim(v, "exp_map: v");
  if (std::abs(v.dot(p)) > 1e-9 * (1.0 + v.norm())) {
    throw Error(Errc::invalid_argument, "exp_map: v is not tangent at p");
  }
  const double th = v.norm();
  if (th < 1e-300) return p;
  Vec out = std::cos(th) * p + std::sin(th) * (v / th);
  return out / out.norm();
}

Vec SphereSpace::log_map(const Vec& p, const Vec& q) const {
  check_dim(p, "log_map: p");
  check_dim(q, "log_map: q");
  const double dot = clamp_unit(p.dot(q));
  Vec u = q - dot * p;
  const double un = u.norm();
  if (un < 1e-14) {
    if (dot > 0.0) return Vec::Zero(d_);
    throw Error(Errc::degenerate_geodesic, "log_map: antipodal points");
  }
  return (std::acos(dot) / un) * u;
}

Vec SphereSpace::weighted_mean(const std::vector<Vec>& pts, const Vec& w,
                               const SolverOptions& opt, SolverDiagnostics* diag) const {
  if (pts.empty()) throw Error(Errc::degenerate_data, "weighted_mean: empty point list");
  if (static_cast<Index>(pts.size()) != w.size()) {
    throw Error(Errc::shape_mismatch, "weighted_mean: points/weights length mismatch");
  }
  if (!w.allFinite()) throw Error(Errc::invalid_argument, "weighted_mean: non-finite weights");
  if (w.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(Errc::degenerate_data, "weighted_mean: all weights are zero");
  }
  const Index n = static_cast<Index>(pts.size());
  Mat p(n, d_);
  for (Index i = 0; i < n; ++i) {
    const Vec& pt = pts[static_cast<std::size_t>(i)];
    check_dim(pt, "weighted_mean: point");
    // Inputs may come from geodesic extensions that overshoot the orthant;
    // they need only lie on the unit sphere. The minimizer itself is kept
    // inside the orthant by the descent.
    if (!pt.allFinite() || std::abs(pt.norm() - 1.0) > 1e-9) {
      throw Error(Errc::infeasible_point, "weighted_mean: point off the unit sphere");
    }
    p.row(i) = pt;
  }

  // Deterministic start candidates: optional warm hint, the projected
  // extrinsic mean, the lowest-objective sample point among a strided scan,
  // and (for mixed-sign weights, where the objective can be multimodal)
  // strided sample-point restarts. Every start is clamped into the orthant.
  std::vector<Vec> candidates;
  const auto push_candidate = [&](const Vec& cand) {
    Vec c = cand;
    if (!contains(c)) {
      Vec clamped = c.cwiseMax(0.0);
      const double nrm = clamped.norm();
      if (nrm < 1e-12) return;  // no nonnegative component to start from
      c = clamped / nrm;
    }
    for (const Vec& prev : candidates) {
      if ((prev - c).norm() < 1e-12) return;
    }
    candidates.push_back(std::move(c));
  };

  if (opt.init_hint && opt.init_hint->size() == d_) {
    push_candidate(*opt.init_hint);
  }
  {
    Vec m = p.transpose() * w;
    if (m.norm() <= 1e-12) m = p.transpose() * w.cwiseAbs();
    m = m.cwiseMax(0.0);
    if (m.norm() > 1e-12) push_candidate(m / m.norm());
  }
  {
    const Index cnt = std::min<Index>(n, std::max(1, opt.init_scan_cap));
    Index best_idx = 0;
    double best_f = kInf;
    for (Index i = 0; i < cnt; ++i) {
      const Index idx = (i * n) / cnt;
      const double f = sphere_objective(p, w, p.row(idx).transpose());
      if (f < best_f) {
        best_f = f;
        best_idx = idx;
      }
    }
    push_candidate(p.row(best_idx).transpose());
  }
  if (w.minCoeff() < 0.0 && w.maxCoeff() > 0.0) {
    for (int k = 1; k <= opt.sphere_restarts; ++k) {
      const Index idx = std::min<Index>(n - 1, (static_cast<Index>(k) * n) /
                                                   (opt.sphere_restarts + 1));
      push_candidate(p.row(idx).transpose());
    }
  }

  if (candidates.empty()) {
    throw Error(Errc::degenerate_data,
                "weighted_mean: no candidate start inside the orthant");
  }

  GdRun best;
  int total_iters = 0;
  for (const Vec& start : candidates) {
    GdRun run = run_descent(p, w, start, opt);
    total_iters += run.iters;
    if (run.f < best.f) best = std::move(run);
  }
  if (!best.converged) {
    throw ConvergenceError("weighted_mean: sphere descent hit the iteration cap",
                           best.nu, total_iters);
  }
  if (diag) {
    diag->iterations = total_iters;
    diag->restarts_used = static_cast<int>(candidates.size()) - 1;
    diag->converged = best.converged;
    diag->objective = best.f;
    if (opt.record_history) diag->history = best.history;
  }
  return best.nu;
}

}  // namespace gci
