#pragma once

#include "gci/space.hpp"

namespace gci {

// ---------------------------------------------------------------------------
// FlatSpace: common machinery for spaces whose geodesics are straight lines in
// the representation and whose metric is a scaled Euclidean norm (symmetric
// matrices under the Frobenius norm, quantile grids, Euclidean boxes).
//
// The feasible set is a closed convex subset of the ambient vectors, so the
// weighted Fréchet mean with positive total weight is exactly
// project(weighted average): the objective is sum(w) * |nu - avg|^2 + const.
// Non-positive total weight falls back to projected gradient descent.
// ---------------------------------------------------------------------------

class FlatSpace : public MetricSpace {
 public:
  double distance(const Vec& a, const Vec& b) const final {
    check_dim(a, "distance: a");
    check_dim(b, "distance: b");
    return metric_scale() * (a - b).norm();
  }

  Vec geodesic_point(const Vec& a, const Vec& b, double s) const final {
    return a + s * (b - a);
  }

  Vec weighted_mean(const std::vector<Vec>& pts, const Vec& w,
                    const SolverOptions& opt = {},
                    SolverDiagnostics* diag = nullptr) const final;

 protected:
  // Factor turning the representation 2-norm into the space's metric.
  virtual double metric_scale() const { return 1.0; }
};

}  // namespace gci
