#include "gci/frobenius_space.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace gci {

namespace {

constexpr int kDykstraMaxSweeps = 500;
constexpr double kDykstraTol = 1e-10;

double max_asymmetry(const Mat& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

double offdiag_row_sum(const Mat& a, Index j) {
  return a.row(j).sum() - a(j, j);
}

// Orthogonal projection of a symmetric matrix onto {A symmetric : A 1 = 0}.
// With r = X 1 and u = r/m - (sum(r)/(2 m^2)) 1, the projection is
// X - u 1' - 1 u'; direct algebra gives (X - u1' - 1u') 1 = 0.
Mat project_row_sums_zero(const Mat& x) {
  const Index m = x.rows();
  const Vec r = x.rowwise().sum();
  const Vec u = r / static_cast<double>(m) -
                Vec::Constant(m, r.sum() / (2.0 * static_cast<double>(m) * m));
  return x - u * Mat::Ones(1, m) - Mat::Ones(m, 1) * u.transpose();
}

Mat project_psd(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(x);
  if (eig.info() != Eigen::Success) {
    throw Error(Errc::convergence_failure, "psd projection: eigensolver failed");
  }
  const Vec lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::string to_string(SymKind kind) {
  switch (kind) {
    case SymKind::laplacian: return "laplacian";
    case SymKind::covariance: return "covariance";
    case SymKind::diag_dominant_psd: return "diag_dominant_psd";
  }
  throw Error(Errc::invalid_argument, "unknown SymKind");
}

SymKind sym_kind_from_string(const std::string& s) {
  if (s == "laplacian") return SymKind::laplacian;
  if (s == "covariance") return SymKind::covariance;
  if (s == "diag_dominant_psd") return SymKind::diag_dominant_psd;
  throw Error(Errc::config_error, "unknown matrix kind '" + s + "'");
}

FrobeniusSpace::FrobeniusSpace(Index m, SymKind kind, double w_bound, double v_bound)
    : m_(m), kind_(kind), w_bound_(w_bound), v_bound_(v_bound) {
  if (m < 1) throw Error(Errc::invalid_argument, "FrobeniusSpace: m must be >= 1");
  if (!(w_bound > 0.0) || !(v_bound > 0.0)) {
    throw Error(Errc::invalid_argument, "FrobeniusSpace: bounds must be positive");
  }
}

Vec FrobeniusSpace::flatten(const Mat& a) const {
  if (a.rows() != m_ || a.cols() != m_) {
    throw Error(Errc::shape_mismatch, "flatten: wrong matrix shape");
  }
  return Eigen::Map<const Vec>(a.data(), m_ * m_);
}

Mat FrobeniusSpace::unflatten(const Vec& y) const {
  check_dim(y, "unflatten");
  return Eigen::Map<const Mat>(y.data(), m_, m_);
}

bool FrobeniusSpace::contains(const Vec& y, double tol) const {
  if (y.size() != ambient_dim() || !y.allFinite()) return false;
  const Eigen::Map<const Mat> a(y.data(), m_, m_);
  if (max_asymmetry(a) > tol) return false;
  switch (kind_) {
    case SymKind::laplacian: {
      for (Index j = 0; j < m_; ++j) {
        if (std::abs(a.row(j).sum()) > tol) return false;
        for (Index k = 0; k < m_; ++k) {
          if (k == j) continue;
          if (a(j, k) > tol || a(j, k) < -w_bound_ - tol) return false;
        }
      }
      return true;
    }
    case SymKind::covariance: {
      if ((a.diagonal().array() > v_bound_ + tol).any()) return false;
      Eigen::SelfAdjointEigenSolver<Mat> eig(a, Eigen::EigenvaluesOnly);
      return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() >= -tol;
    }
    case SymKind::diag_dominant_psd: {
      for (Index j = 0; j < m_; ++j) {
        double off = 0.0;
        for (Index k = 0; k < m_; ++k) {
          if (k == j) continue;
          if (a(j, k) < -tol || a(j, k) > w_bound_ + tol) return false;
          off += a(j, k);
        }
        if (a(j, j) < off - tol) return false;
      }
      return true;
    }
  }
  return false;
}

Vec FrobeniusSpace::project(const Vec& y) const {
  check_dim(y, "project");
  if (!y.allFinite()) throw Error(Errc::invalid_argument, "project: non-finite entries");
  Mat a = unflatten(y);
  if (max_asymmetry(a) > 1e-9 * (1.0 + a.cwiseAbs().maxCoeff())) {
    throw Error(Errc::invalid_argument, "project: input matrix is not symmetric");
  }
  if (contains(y)) return y;
  a = 0.5 * (a + a.transpose());  // exact symmetry before the constraint sweeps

  // Per-constraint projections for Dykstra's scheme; all preserve symmetry.
  std::vector<std::function<Mat(const Mat&)>> projectors;
  switch (kind_) {
    case SymKind::laplacian:
      projectors.push_back(project_row_sums_zero);
      projectors.push_back([this](const Mat& x) {
        Mat out = x;
        for (Index j = 0; j < m_; ++j)
          for (Index k = 0; k < m_; ++k)
            if (j != k) out(j, k) = std::clamp(out(j, k), -w_bound_, 0.0);
        return out;
      });
      break;
    case SymKind::covariance:
      projectors.push_back(project_psd);
      projectors.push_back([this](const Mat& x) {
        Mat out = x;
        for (Index j = 0; j < m_; ++j) out(j, j) = std::min(out(j, j), v_bound_);
        return out;
      });
      break;
    case SymKind::diag_dominant_psd: {
      projectors.push_back([this](const Mat& x) {
        Mat out = x;
        for (Index j = 0; j < m_; ++j)
          for (Index k = 0; k < m_; ++k)
            if (j != k) out(j, k) = std::clamp(out(j, k), 0.0, w_bound_);
        return out;
      });
      // One half-space per row: A_jj - sum_{k != j} A_jk >= 0. The symmetric
      // gradient has +1 at (j,j) and -1/2 at (j,k),(k,j), squared norm
      // 1 + (m-1)/2.
      const double norm2 = 1.0 + (static_cast<double>(m_) - 1.0) / 2.0;
      for (Index j = 0; j < m_; ++j) {
        projectors.push_back([this, j, norm2](const Mat& x) {
          const double c = x(j, j) - offdiag_row_sum(x, j);
          if (c >= 0.0) return x;
          Mat out = x;
          const double shift = c / norm2;  // negative
          out(j, j) -= shift;
          for (Index k = 0; k < m_; ++k) {
            if (k == j) continue;
            out(j, k) += 0.5 * shift;
            out(k, j) += 0.5 * shift;
          }
          return out;
        });
      }
      break;
    }
  }

  std::vector<Mat> increments(projectors.size(), Mat::Zero(m_, m_));
  Mat x = a;
  for (int sweep = 0; sweep < kDykstraMaxSweeps; ++sweep) {
    const Mat sweep_start = x;
    for (std::size_t k = 0; k < projectors.size(); ++k) {
      const Mat z = x + increments[k];
      x = projectors[k](z);
      increments[k] = z - x;
    }
    if ((x - sweep_start).cwiseAbs().maxCoeff() < kDykstraTol) {
      return flatten(x);
    }
  }
  throw ConvergenceError("project: Dykstra sweeps did not converge",
                         flatten(x), kDykstraMaxSweeps);
}

Vec pack_upper(const Mat& a) {
  const Index m = a.rows();
  if (a.cols() != m) throw Error(Errc::shape_mismatch, "pack_upper: square matrix required");
  Vec out(m * (m + 1) / 2);
  Index idx = 0;
  for (Index j = 0; j < m; ++j)
    for (Index k = j; k < m; ++k) out[idx++] = a(j, k);
  return out;
}

Mat unpack_upper(const Vec& u, Index m) {
  if (u.size() != m * (m + 1) / 2) {
    throw Error(Errc::shape_mismatch, "unpack_upper: wrong packed length");
  }
  Mat a(m, m);
  Index idx = 0;
  for (Index j = 0; j < m; ++j)
    for (Index k = j; k < m; ++k) {
      a(j, k) = u[idx];
      a(k, j) = u[idx];
      ++idx;
    }
  return a;
}

}  // namespace gci
