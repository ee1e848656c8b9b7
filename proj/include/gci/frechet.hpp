#pragma once

#include "gci/space.hpp"

namespace gci {

// A point cloud with signed weights, the input of a Fréchet mean problem.
struct WeightedSample {
  std::vector<Vec> points;
  Vec weights;
};

// argmin_nu sum_i w_i d^2(nu, points[i]) over the feasible set of `space`.
Vec weighted_frechet_mean(const MetricSpace& space, const WeightedSample& ws,
                          const SolverOptions& opt = {},
                          SolverDiagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Global Fréchet regression for one treatment group.
//
// The fitted object retains the group's outcomes together with the covariate
// rows of the FULL sample: the regression weights
//   w_i(x) = 1 + (X_i - xbar)' Sigma^{-1} (x - xbar)
// are defined over all n units (xbar and Sigma are full-sample moments), and
// the prediction at x solves the weighted Fréchet criterion over the group's
// outcomes using those weights restricted to the group. In flat spaces the
// prediction is the weighted-least-squares fitted point (the criterion's
// stationary point, projected into the feasible set), which is defined for
// either sign of the — possibly negative — weight sum; on the sphere the
// constrained mean solver is used.
// ---------------------------------------------------------------------------

class GfrModel {
 public:
  static GfrModel fit(const MetricSpace& space, const Mat& x, const std::vector<int>& t,
                      const std::vector<Vec>& y, int group);

  const MetricSpace& space() const { return *space_; }
  int group() const { return group_; }
  Index n_total() const { return x_.rows(); }
  Index n_group() const { return static_cast<Index>(group_rows_.size()); }
  const Vec& xbar() const { return xbar_; }
  const Mat& sigma() const { return sigma_; }

  // Regression weights over all n training units; their mean is exactly 1.
  Vec gfr_weights(const Vec& x) const;

  Vec predict(const Vec& x, const SolverOptions& opt = {},
              SolverDiagnostics* diag = nullptr) const;

  // Predictions at the rows of xq (which must live in the model's covariate
  // coordinates). Flat spaces reduce to one weighted-average GEMM plus
  // per-row projection; the sphere chains warm starts through queries sorted
  // by the first covariate.
  std::vector<Vec> predict_batch(const Mat& xq, const SolverOptions& opt = {}) const;

  // Predictions at the model's own training covariate rows (all n of them).
  std::vector<Vec> predict_training(const SolverOptions& opt = {}) const;

 private:
  GfrModel() = default;

  const MetricSpace* space_ = nullptr;
  int group_ = 0;
  Mat x_;                          // full-sample covariates, n x p
  std::vector<Index> group_rows_;  // indices into the full sample
  std::vector<Vec> y_group_;
  Mat y_group_mat_;                // row-stacked outcomes (flat fast path)
  bool flat_ = false;
  Vec xbar_;
  Mat sigma_, sigma_inv_;
};

// Free-function front ends mirroring the model methods.
GfrModel gfr_fit(const MetricSpace& space, const Mat& x, const std::vector<int>& t,
                 const std::vector<Vec>& y, int group);
Vec gfr_weights(const GfrModel& model, const Vec& x);
Vec gfr_predict(const GfrModel& model, const Vec& x, const SolverOptions& opt = {});

}  // namespace gci
