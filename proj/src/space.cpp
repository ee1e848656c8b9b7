#include "gci/space.hpp"

#include <atomic>
#include <mutex>

namespace gci {

// ---------------------------------------------------------------------------
// MetricSpace helpers
// ---------------------------------------------------------------------------

void MetricSpace::check_dim(const Vec& y, const char* what) const {
  if (y.size() != ambient_dim()) {
    throw Error(Errc::shape_mismatch,
                std::string(what) + ": expected length " + std::to_string(ambient_dim()) +
                    ", got " + std::to_string(y.size()));
  }
}

void MetricSpace::check_point(const Vec& y, const char* what, double tol) const {
  check_dim(y, what);
  if (!y.allFinite()) {
    throw Error(Errc::invalid_argument, std::string(what) + ": non-finite entries");
  }
  if (!contains(y, tol)) {
    throw Error(Errc::infeasible_point,
                std::string(what) + ": point outside the feasible set of " + name());
  }
}

// ---------------------------------------------------------------------------
// Boundary search and boundary-aware evaluation
// ---------------------------------------------------------------------------

BoundaryHit boundary_hit(const MetricSpace& space, const Vec& a, const Vec& b) {
  space.check_point(a, "boundary_hit: a");
  space.check_point(b, "boundary_hit: b");
  const double d = space.distance(a, b);
  if (!(d > 0.0)) {
    throw Error(Errc::degenerate_geodesic, "boundary_hit: endpoints coincide");
  }

  const double horizon = std::min(kExtensionHorizon, space.extension_horizon(a, b));

  // Bracket the exit parameter by doubling from s = 1 (feasible by precondition).
  // The feasible set is geodesically convex in every space here, so
  // {s >= 0 : feasible} is a single interval and doubling cannot skip it.
  double lo = 1.0;
  double hi = 0.0;
  double s = 2.0;
  while (true) {
    if (s >= horizon) s = horizon;
    if (space.contains(space.geodesic_point(a, b, s))) {
      lo = s;
      if (s >= horizon) {
        BoundaryHit out;  // never leaves the set within the horizon
        out.bounded = false;
        return out;
      }
      s *= 2.0;
    } else {
      hi = s;
      break;
    }
  }

  for (int it = 0; it < 200 && hi - lo > kBoundaryTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (space.contains(space.geodesic_point(a, b, mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  BoundaryHit out;
  out.bounded = true;
  out.param = lo;
  out.point = space.geodesic_point(a, b, lo);
  out.dist = space.distance(a, out.point);
  return out;
}

Vec geodesic_eval(const MetricSpace& space, const Vec& a, const Vec& b, double t) {
  if (!std::isfinite(t)) {
    throw Error(Errc::invalid_argument, "geodesic_eval: t must be finite");
  }
  space.check_point(a, "geodesic_eval: a");
  space.check_point(b, "geodesic_eval: b");

  const double d = space.distance(a, b);
  if (d <= 1e-14 * (1.0 + a.norm() + b.norm())) {
    return a;  // identity convention: gamma_{alpha,alpha}(t) = alpha
  }
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  if (t < 0.0) return geodesic_eval(space, b, a, 1.0 - t);
  if (t < 1.0) return space.geodesic_point(a, b, t);

  // Extension beyond b. An unbounded ray extends affinely; a bounded one is
  // damped toward the boundary point zeta, covering the fraction
  // h(t) = 1 - (1 - d(a,b)/d(a,zeta))^t of d(a,zeta) so that the extension
  // approaches zeta as t grows but never crosses it.
  const BoundaryHit bh = boundary_hit(space, a, b);
  if (!bh.bounded) return space.geodesic_point(a, b, t);
  const double r = std::min(1.0, d / bh.dist);
  const double h = 1.0 - std::pow(1.0 - r, t);
  return space.geodesic_point(a, b, h / r);
}

// ---------------------------------------------------------------------------
// Geodesic segments
// ---------------------------------------------------------------------------

GeodesicSegment::GeodesicSegment(const MetricSpace& space, Vec start, Vec end)
    : space_(&space), start_(std::move(start)), end_(std::move(end)) {
  space_->check_point(start_, "GeodesicSegment: start");
  space_->check_point(end_, "GeodesicSegment: end");
  length_ = space_->distance(start_, end_);
}

GeodesicSegment identity_segment(const MetricSpace& space, const Vec& at) {
  return GeodesicSegment(space, at, at);
}

GeodesicSegment reverse(const GeodesicSegment& g) {
  return GeodesicSegment(g.space(), g.end(), g.start());
}

GeodesicSegment compose(const GeodesicSegment& first, const GeodesicSegment& second,
                        double tol) {
  if (&first.space() != &second.space()) {
    throw Error(Errc::composition_mismatch, "compose: segments live in different spaces");
  }
  const double gap = first.space().distance(first.end(), second.start());
  const double scale = 1.0 + first.length() + second.length();
  if (gap > tol * scale) {
    throw Error(Errc::composition_mismatch,
                "compose: first.end != second.start (gap " + std::to_string(gap) + ")");
  }
  return GeodesicSegment(first.space(), first.start(), second.end());
}

GeodesicSegment scale(const GeodesicSegment& g, ScalarFactor factor) {
  if (!std::isfinite(factor.rho)) {
    throw Error(Errc::invalid_argument, "scale: rho must be finite");
  }
  return GeodesicSegment(g.space(), g.start(), g.eval(factor.rho));
}

// ---------------------------------------------------------------------------
// normal_quantile: Wichura's algorithm AS 241 (PPND16), |error| ~ 1e-16.
// ---------------------------------------------------------------------------

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(Errc::invalid_argument, "normal_quantile: p must lie in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

// ---------------------------------------------------------------------------
// parallel_for
// ---------------------------------------------------------------------------

void parallel_for(int total, int jobs, const std::function<void(int)>& fn) {
  if (total <= 0) return;
  jobs = std::max(1, std::min(jobs, total));
  if (jobs == 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= total) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gci
