#include "gci/frechet.hpp"

#include <algorithm>
#include <numeric>

#include "gci/flat_space.hpp"

namespace gci {

namespace {

// Flat-space regression prediction: the weighted-least-squares fitted point,
// i.e. the stationary point sum(w_i Y_i) / sum(w_i) of the weighted criterion,
// projected into the feasible set. The GFR weights are signed, and the fitted
// value — defined for either sign of the weight sum — is what the regression
// reports; a constrained argmin need not exist when the sum is negative. Only
// a vanishing weight sum has no fitted value and falls back to the
// constrained mean solver.
Vec flat_fitted_point(const FlatSpace& fs, const std::vector<Vec>& pts, const Vec& w,
                      const SolverOptions& opt, SolverDiagnostics* diag) {
  const double wsum = w.sum();
  const double wabs = w.cwiseAbs().sum();
  if (std::abs(wsum) <= 1e-12 * wabs) return fs.weighted_mean(pts, w, opt, diag);

  Vec avg = Vec::Zero(fs.ambient_dim());
  for (std::size_t i = 0; i < pts.size(); ++i) avg += w[static_cast<Index>(i)] * pts[i];
  avg /= wsum;
  if (!fs.contains(avg)) avg = fs.project(avg);
  if (diag) {
    diag->iterations = 0;
    diag->converged = true;
    double f = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = fs.distance(avg, pts[i]);
      f += w[static_cast<Index>(i)] * d * d;
    }
    diag->objective = f;
    if (opt.record_history) diag->history = {f};
  }
  return avg;
}

}  // namespace

Vec weighted_frechet_mean(const MetricSpace& space, const WeightedSample& ws,
                          const SolverOptions& opt, SolverDiagnostics* diag) {
  return space.weighted_mean(ws.points, ws.weights, opt, diag);
}

GfrModel GfrModel::fit(const MetricSpace& space, const Mat& x, const std::vector<int>& t,
                       const std::vector<Vec>& y, int group) {
  const Index n = x.rows();
  if (group != 0 && group != 1) {
    throw Error(Errc::invalid_argument, "gfr_fit: group must be 0 or 1");
  }
  if (n == 0) {
    throw Error(Errc::degenerate_data, "gfr_fit: empty sample");
  }
  if (static_cast<Index>(t.size()) != n || static_cast<Index>(y.size()) != n) {
    throw Error(Errc::shape_mismatch, "gfr_fit: covariates, treatments and outcomes disagree in length");
  }
  if (!x.allFinite()) {
    throw Error(Errc::invalid_argument, "gfr_fit: non-finite covariate");
  }

  GfrModel m;
  m.space_ = &space;
  m.group_ = group;
  m.x_ = x;

  for (Index i = 0; i < n; ++i) {
    if (t[i] != 0 && t[i] != 1) {
      throw Error(Errc::validation_error, "gfr_fit: treatment indicators must be 0 or 1");
    }
    space.check_point(y[i], "regression outcome");
    if (t[i] == group) m.group_rows_.push_back(i);
  }
  if (m.group_rows_.empty()) {
    throw Error(Errc::degenerate_data, "gfr_fit: no units in the requested treatment group");
  }
  m.y_group_.reserve(m.group_rows_.size());
  for (Index i : m.group_rows_) m.y_group_.push_back(y[i]);

  m.flat_ = dynamic_cast<const FlatSpace*>(&space) != nullptr;
  if (m.flat_) {
    m.y_group_mat_.resize(static_cast<Index>(m.y_group_.size()), space.ambient_dim());
    for (Index k = 0; k < m.y_group_mat_.rows(); ++k) m.y_group_mat_.row(k) = m.y_group_[static_cast<std::size_t>(k)];
  }

  m.xbar_ = x.colwise().mean();
  Mat centered = x.rowwise() - m.xbar_.transpose();
  m.sigma_ = (centered.transpose() * centered) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Mat> es(m.sigma_);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::convergence_failure, "gfr_fit: covariance eigendecomposition failed");
  }
  const double scale = std::max(m.sigma_.trace(), 1.0);
  Mat sigma_reg = m.sigma_;
  if (es.eigenvalues().minCoeff() <= 1e-12 * scale) {
    sigma_reg += 1e-8 * scale * Mat::Identity(m.sigma_.rows(), m.sigma_.cols());
  }
  m.sigma_inv_ = sigma_reg.ldlt().solve(Mat::Identity(sigma_reg.rows(), sigma_reg.cols()));
  return m;
}

Vec GfrModel::gfr_weights(const Vec& x) const {
  if (x.size() != x_.cols()) {
    throw Error(Errc::shape_mismatch, "gfr_weights: covariate dimension mismatch");
  }
  Vec dir = sigma_inv_ * (x - xbar_);
  return Vec::Ones(x_.rows()) + (x_.rowwise() - xbar_.transpose()) * dir;
}

Vec GfrModel::predict(const Vec& x, const SolverOptions& opt, SolverDiagnostics* diag) const {
  Vec w_all = gfr_weights(x);
  Vec w(static_cast<Index>(group_rows_.size()));
  for (std::size_t k = 0; k < group_rows_.size(); ++k) w[static_cast<Index>(k)] = w_all[group_rows_[k]];
  if (flat_) {
    return flat_fitted_point(static_cast<const FlatSpace&>(*space_), y_group_, w, opt, diag);
  }
  return space_->weighted_mean(y_group_, w, opt, diag);
}

std::vector<Vec> GfrModel::predict_batch(const Mat& xq, const SolverOptions& opt) const {
  if (xq.cols() != x_.cols()) {
    throw Error(Errc::shape_mismatch, "predict_batch: covariate dimension mismatch");
  }
  const Index q = xq.rows();
  std::vector<Vec> out(static_cast<std::size_t>(q));
  if (q == 0) return out;

  if (flat_) {
    const auto& fs = static_cast<const FlatSpace&>(*space_);
    // W(q x ng): restriction of the regression weights to the group rows.
    Mat xg(static_cast<Index>(group_rows_.size()), x_.cols());
    for (std::size_t k = 0; k < group_rows_.size(); ++k) xg.row(static_cast<Index>(k)) = x_.row(group_rows_[k]);
    Mat qc = (xq.rowwise() - xbar_.transpose()) * sigma_inv_;             // q x p
    Mat w = Mat::Ones(q, xg.rows()) + qc * (xg.rowwise() - xbar_.transpose()).transpose();
    Mat sums = w * y_group_mat_;                                          // q x D
    for (Index r = 0; r < q; ++r) {
      const double wsum = w.row(r).sum();
      const double wabs = w.row(r).cwiseAbs().sum();
      if (std::abs(wsum) > 1e-12 * wabs) {
        Vec avg = sums.row(r) / wsum;
        out[static_cast<std::size_t>(r)] = fs.contains(avg) ? avg : fs.project(avg);
      } else {
        Vec wr = w.row(r);
        out[static_cast<std::size_t>(r)] = space_->weighted_mean(y_group_, wr, opt, nullptr);
      }
    }
    return out;
  }

  // Curved spaces: process queries in first-covariate order, chaining each
  // solution into the next solve as its warm start. Sequential on purpose so
  // the result is independent of the job count.
  std::vector<Index> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return xq(a, 0) < xq(b, 0); });
  SolverOptions chained = opt;
  for (Index r : order) {
    Vec pred = predict(xq.row(r).transpose(), chained, nullptr);
    chained.init_hint = pred;
    out[static_cast<std::size_t>(r)] = std::move(pred);
  }
  return out;
}

std::vector<Vec> GfrModel::predict_training(const SolverOptions& opt) const {
  return predict_batch(x_, opt);
}

GfrModel gfr_fit(const MetricSpace& space, const Mat& x, const std::vector<int>& t,
                 const std::vector<Vec>& y, int group) {
  return GfrModel::fit(space, x, t, y, group);
}

Vec gfr_weights(const GfrModel& model, const Vec& x) { return model.gfr_weights(x); }

Vec gfr_predict(const GfrModel& model, const Vec& x, const SolverOptions& opt) {
  return model.predict(x, opt);
}

}  // namespace gci
