#pragma once

#include "gci/flat_space.hpp"

namespace gci {

// Constraint families for symmetric-matrix-valued outcomes.
enum class SymKind {
  laplacian,          // row sums 0, off-diagonals in [-W, 0]
  covariance,         // positive semi-definite, diagonal <= V
  diag_dominant_psd,  // off-diagonals in [0, W], diagonal dominates its row
                      // (PSD follows from Gershgorin, so no eigensolve needed)
};

std::string to_string(SymKind kind);
SymKind sym_kind_from_string(const std::string& s);

// m x m symmetric matrices under the Frobenius metric. Points are flattened
// full matrices (length m*m, column-major); symmetry is an invariant of every
// feasible point. Infeasible matrices are projected by Dykstra's alternating
// scheme with the closed-form per-constraint projections.
class FrobeniusSpace : public FlatSpace {
 public:
  FrobeniusSpace(Index m, SymKind kind, double w_bound = 1e6, double v_bound = 1e6);

  std::string name() const override { return "frobenius/" + to_string(kind_); }
  Index ambient_dim() const override { return m_ * m_; }

  bool contains(const Vec& y, double tol = 1e-9) const override;
  Vec project(const Vec& y) const override;

  Index matrix_dim() const { return m_; }
  SymKind kind() const { return kind_; }
  double w_bound() const { return w_bound_; }
  double v_bound() const { return v_bound_; }

  Vec flatten(const Mat& a) const;
  Mat unflatten(const Vec& y) const;

 private:
  Index m_;
  SymKind kind_;
  double w_bound_, v_bound_;
};

// Upper-triangle packing used by the CSV serialization: row-major entries
// (0,0), (0,1), ..., (0,m-1), (1,1), ..., (m-1,m-1); length m(m+1)/2.
Vec pack_upper(const Mat& a);
Mat unpack_upper(const Vec& u, Index m);

}  // namespace gci
