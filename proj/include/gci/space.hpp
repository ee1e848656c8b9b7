#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gci/common.hpp"

namespace gci {

// ---------------------------------------------------------------------------
// Fréchet-mean solver knobs shared by all spaces.
// ---------------------------------------------------------------------------

struct SolverOptions {
  double obj_tol = 1e-9;    // relative objective-change stopping rule (flat PGD)
  double grad_tol = 1e-10;  // gradient-norm stopping rule (sphere)
  double step_tol = 1e-12;
  int max_iters = 10000;
  int sphere_restarts = 5;  // strided restart count for mixed-sign weights
  int init_scan_cap = 64;   // at most this many sample points scanned for the start
  bool record_history = false;
  std::optional<Vec> init_hint;  // warm start candidate (never the only candidate)
};

struct SolverDiagnostics {
  int iterations = 0;
  int restarts_used = 0;
  bool converged = true;
  double objective = 0.0;
  std::vector<double> history;  // per-iteration objectives when record_history
};

// ---------------------------------------------------------------------------
// MetricSpace: the contract every geodesic space implements.
//
// Points are dense Eigen vectors of length ambient_dim(); each space fixes the
// interpretation (flattened symmetric matrix, unit vector, quantile grid, ...).
// geodesic_point(a, b, s) is the *unconstrained* unit-speed parameterization
// through a and b: s is measured in multiples of d(a, b) from a toward b and
// may be any real (affine line for flat spaces, great circle for the sphere).
// Boundary handling is layered on top by geodesic_eval/boundary_hit below.
// ---------------------------------------------------------------------------

class MetricSpace {
 public:
  virtual ~MetricSpace() = default;

  virtual std::string name() const = 0;
  virtual Index ambient_dim() const = 0;

  virtual double distance(const Vec& a, const Vec& b) const = 0;

  // Membership in the feasible set, with per-constraint absolute slack `tol`.
  virtual bool contains(const Vec& y, double tol = 1e-9) const = 0;

  // Metric projection onto the feasible set. Feasible inputs are returned
  // unchanged; infeasible inputs land within the space's own optimality
  // tolerance of the true projection.
  virtual Vec project(const Vec& y) const = 0;

  virtual Vec geodesic_point(const Vec& a, const Vec& b, double s) const = 0;

  // Upper bound on s beyond which geodesic_point(a, b, s) is guaranteed to
  // have left the feasible set (pi/theta on the sphere); +inf when no such
  // a-priori bound exists.
  virtual double extension_horizon(const Vec& a, const Vec& b) const {
    (void)a; (void)b; return kInf;
  }

  // Weighted Fréchet mean: argmin_nu sum_i w_i d^2(nu, pts[i]) over the
  // feasible set. Weights may be negative (sum need not be positive).
  virtual Vec weighted_mean(const std::vector<Vec>& pts, const Vec& w,
                            const SolverOptions& opt = {},
                            SolverDiagnostics* diag = nullptr) const = 0;

  // Shared argument validation helpers.
  void check_dim(const Vec& y, const char* what) const;
  void check_point(const Vec& y, const char* what, double tol = 1e-9) const;
};

// ---------------------------------------------------------------------------
// Boundary-aware geodesic evaluation
// ---------------------------------------------------------------------------

struct BoundaryHit {
  bool bounded = false;  // false: the ray stays feasible to the search horizon
  double param = kInf;   // s* in units of d(a, b); 1 <= param when bounded
  double dist = kInf;    // d(a, zeta)
  Vec point;             // zeta, the boundary point (empty when unbounded)
};

// Scalar multiplication factor for the geodesic algebra (rho ⊙ gamma).
struct ScalarFactor {
  double rho = 1.0;
};

// Largest multiple of d(a,b) scanned before a ray counts as unbounded.
inline constexpr double kExtensionHorizon = 1e6;
// Bisection tolerance on the geodesic parameter for boundary location.
inline constexpr double kBoundaryTol = 1e-10;

// Locate where the forward extension of the geodesic from a through b leaves
// the feasible set. Requires a != b.
BoundaryHit boundary_hit(const MetricSpace& space, const Vec& a, const Vec& b);

// Evaluate the geodesic from a to b at any real t:
//   t in [0,1]  — the connecting geodesic itself;
//   t > 1       — extension beyond b: affine while the ray is unbounded,
//                 otherwise damped toward the boundary point zeta at fraction
//                 h(t) = 1 - (1 - d(a,b)/d(a,zeta))^t of d(a,zeta);
//   t < 0       — mirror rule: eval(b, a, 1 - t).
// a == b (zero distance) returns a for every t (the identity convention).
Vec geodesic_eval(const MetricSpace& space, const Vec& a, const Vec& b, double t);

// ---------------------------------------------------------------------------
// Geodesic segments and their algebra
// ---------------------------------------------------------------------------

class GeodesicSegment {
 public:
  GeodesicSegment(const MetricSpace& space, Vec start, Vec end);

  const MetricSpace& space() const { return *space_; }
  const Vec& start() const { return start_; }
  const Vec& end() const { return end_; }
  double length() const { return length_; }

  Vec eval(double t) const { return geodesic_eval(*space_, start_, end_, t); }

 private:
  const MetricSpace* space_;
  Vec start_, end_;
  double length_;
};

// Degenerate segment at a single point (the identity element id_alpha).
GeodesicSegment identity_segment(const MetricSpace& space, const Vec& at);

// Reversal: ⊖ gamma_{a,b} = gamma_{b,a}.
GeodesicSegment reverse(const GeodesicSegment& g);

// Composition gamma_{a,z} ⊕ gamma_{z,b} = gamma_{a,b}; the shared endpoint must
// match within `tol` (relative to segment scale) or a composition error is
// raised.
GeodesicSegment compose(const GeodesicSegment& first, const GeodesicSegment& second,
                        double tol = 1e-9);

// Scalar multiplication rho ⊙ gamma_{a,b} = gamma_{a, eval(rho)}.
GeodesicSegment scale(const GeodesicSegment& g, ScalarFactor factor);

}  // namespace gci
