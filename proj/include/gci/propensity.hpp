#pragma once

#include <string>
#include <vector>

#include "gci/common.hpp"

namespace gci {

// Covariate transform applied before the logistic fit (and before every
// prediction made with that fit). `square` squares each coordinate, the
// deliberate misspecification used in the simulation studies.
enum class FeatureMap { identity, square };

std::string to_string(FeatureMap fmap);
FeatureMap feature_map_from_string(const std::string& s);

Mat apply_feature_map(const Mat& x, FeatureMap fmap);

struct PropensityFit {
  Vec phi;  // [intercept, slope coefficients] on the mapped covariates
  FeatureMap fmap = FeatureMap::identity;
  double eta0 = 0.05;
  int iterations = 0;
  bool converged = false;
  double log_likelihood = 0.0;
  std::vector<double> loglik_history;  // one entry per Newton iterate
};

// Newton (IRLS) maximum-likelihood logistic regression of t on [1, f(x)].
// Step-halving keeps the log-likelihood nondecreasing; a tiny ridge guards
// the Hessian solve. Perfect or quasi-perfect separation raises
// Errc::separation, a single-arm sample raises Errc::degenerate_data.
PropensityFit fit_logistic(const Mat& x, const std::vector<int>& t,
                           FeatureMap fmap = FeatureMap::identity, double eta0 = 0.05,
                           int max_iters = 100, double tol = 1e-10);

// expit(phi . [1, f(x)]) clipped to [eta0, 1 - eta0].
double predict_propensity(const PropensityFit& fit, const Vec& x);
Vec predict_propensity_batch(const PropensityFit& fit, const Mat& x);

}  // namespace gci
