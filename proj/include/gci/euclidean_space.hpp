#pragma once

#include "gci/flat_space.hpp"

namespace gci {

// Euclidean vectors with optional box bounds. The unbounded scalar version is
// the 1-D test space used for the closed-form estimator oracles; a bounded
// interval exercises the boundary-damped geodesic extension in a setting where
// everything is checkable by hand.
class EuclideanSpace : public FlatSpace {
 public:
  explicit EuclideanSpace(Index dim = 1);
  EuclideanSpace(double lo, double hi);       // bounded interval, dim 1
  EuclideanSpace(Vec lo, Vec hi);             // general box

  std::string name() const override { return "euclidean"; }
  Index ambient_dim() const override { return lo_.size(); }

  bool contains(const Vec& y, double tol = 1e-9) const override;
  Vec project(const Vec& y) const override;

  const Vec& lower() const { return lo_; }
  const Vec& upper() const { return hi_; }

 private:
  Vec lo_, hi_;
};

}  // namespace gci
