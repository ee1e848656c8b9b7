#include "gci/euclidean_space.hpp"

namespace gci {

EuclideanSpace::EuclideanSpace(Index dim)
    : lo_(Vec::Constant(dim, -kInf)), hi_(Vec::Constant(dim, kInf)) {
  if (dim < 1) throw Error(Errc::invalid_argument, "EuclideanSpace: dim must be >= 1");
}

EuclideanSpace::EuclideanSpace(double lo, double hi)
    : lo_(Vec::Constant(1, lo)), hi_(Vec::Constant(1, hi)) {
  if (!(lo < hi)) throw Error(Errc::invalid_argument, "EuclideanSpace: lo < hi required");
}

EuclideanSpace::EuclideanSpace(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.size() < 1) {
    throw Error(Errc::shape_mismatch, "EuclideanSpace: bound vectors must match");
  }
  if ((lo_.array() >= hi_.array()).any()) {
    throw Error(Errc::invalid_argument, "EuclideanSpace: lo < hi required elementwise");
  }
}

bool EuclideanSpace::contains(const Vec& y, double tol) const {
  if (y.size() != ambient_dim() || !y.allFinite()) return false;
  return (y.array() >= lo_.array() - tol).all() && (y.array() <= hi_.array() + tol).all();
}

Vec EuclideanSpace::project(const Vec& y) const {
  check_dim(y, "project");
  if (!y.allFinite()) throw Error(Errc::invalid_argument, "project: non-finite entries");
  if (contains(y)) return y;
  return y.cwiseMax(lo_).cwiseMin(hi_);
}

}  // namespace gci
