#pragma once

#include "gci/space.hpp"

namespace gci {

// Positive orthant of the unit sphere S^{d-1} under the geodesic (arc) metric,
// the image of compositional data under the component-wise square root. Points
// are unit vectors with nonnegative coordinates; geodesics are great-circle
// arcs, which stay in the orthant between feasible endpoints (the orthant is
// geodesically convex with diameter pi/2).
class SphereSpace : public MetricSpace {
 public:
  explicit SphereSpace(Index d);

  std::string name() const override { return "sphere"; }
  Index ambient_dim() const override { return d_; }

  double distance(const Vec& a, const Vec& b) const override;
  bool contains(const Vec& y, double tol = 1e-9) const override;
  Vec project(const Vec& y) const override;
  Vec geodesic_point(const Vec& a, const Vec& b, double s) const override;
  // Beyond s = pi/theta the arc reaches the antipode of a, which is always
  // outside the orthant, so the boundary search never needs to look further.
  double extension_horizon(const Vec& a, const Vec& b) const override;

  Vec weighted_mean(const std::vector<Vec>& pts, const Vec& w,
                    const SolverOptions& opt = {},
                    SolverDiagnostics* diag = nullptr) const override;

  // Riemannian exponential map at p: |v| is the arc length travelled, v must
  // be tangent at p (v . p = 0).
  Vec exp_map(const Vec& p, const Vec& v) const;
  // Riemannian logarithm at p: the tangent vector u with exp_map(p, u) = q.
  Vec log_map(const Vec& p, const Vec& q) const;

 private:
  Index d_;
};

}  // namespace gci
