#include "gci/propensity.hpp"

#include <algorithm>
#include <cmath>

namespace gci {
namespace {

double bernoulli_loglik(const Vec& eta, const std::vector<int>& t) {
  // sum t*eta - log(1 + exp(eta)), evaluated stably on both tails.
  double ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    const double log1pe = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += t[static_cast<std::size_t>(i)] * e - log1pe;
  }
  return ll;
}

}  // namespace

std::string to_string(FeatureMap fmap) {
  return fmap == FeatureMap::identity ? "identity" : "square";
}

FeatureMap feature_map_from_string(const std::string& s) {
  if (s == "identity") return FeatureMap::identity;
  if (s == "square") return FeatureMap::square;
  throw Error(Errc::config_error, "unknown feature map: " + s);
}

Mat apply_feature_map(const Mat& x, FeatureMap fmap) {
  if (fmap == FeatureMap::identity) return x;
  return x.array().square();
}

PropensityFit fit_logistic(const Mat& x, const std::vector<int>& t, FeatureMap fmap,
                           double eta0, int max_iters, double tol) {
  const Index n = x.rows();
  if (static_cast<Index>(t.size()) != n) {
    throw Error(Errc::shape_mismatch, "fit_logistic: covariates and treatments disagree in length");
  }
  if (n == 0) throw Error(Errc::degenerate_data, "fit_logistic: empty sample");
  if (!(eta0 > 0.0 && eta0 < 0.5)) {
    throw Error(Errc::config_error, "fit_logistic: eta0 must lie in (0, 0.5)");
  }
  if (!x.allFinite()) throw Error(Errc::invalid_argument, "fit_logistic: non-finite covariate");
  int ones = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != 0 && t[i] != 1) {
      throw Error(Errc::validation_error, "fit_logistic: treatment indicators must be 0 or 1");
    }
    ones += t[i];
  }
  if (ones == 0 || ones == static_cast<int>(t.size())) {
    throw Error(Errc::degenerate_data, "fit_logistic: sample contains a single treatment arm");
  }

  Mat f = apply_feature_map(x, fmap);
  Mat z(n, f.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(f.cols()) = f;
  const Index p = z.cols();

  PropensityFit fit;
  fit.fmap = fmap;
  fit.eta0 = eta0;
  fit.phi = Vec::Zero(p);

  Vec eta = Vec::Zero(n);
  double ll = bernoulli_loglik(eta, t);
  fit.loglik_history.push_back(ll);

  const double grad_tol = tol * std::max(1.0, std::sqrt(static_cast<double>(n)));
  for (int iter = 0; iter < max_iters; ++iter) {
    Vec prob = eta.unaryExpr([](double e) { return expit(e); });
    Vec resid(n);
    for (Index i = 0; i < n; ++i) resid[i] = t[static_cast<std::size_t>(i)] - prob[i];
    Vec grad = z.transpose() * resid;
    if (grad.lpNorm<Eigen::Infinity>() <= grad_tol) {
      fit.converged = true;
      break;
    }

    Vec w = prob.array() * (1.0 - prob.array());
    Mat h = z.transpose() * w.asDiagonal() * z;
    const double ridge = 1e-12 * std::max(h.diagonal().maxCoeff(), 1.0);
    h.diagonal().array() += ridge;
    Vec delta = h.ldlt().solve(grad);
    if (!delta.allFinite()) throw Error(Errc::separation, "fit_logistic: singular update");

    double step = 1.0;
    Vec phi_new;
    Vec eta_new;
    double ll_new = ll;
    bool improved = false;
    // Accept up to a rounding-level decrease: near the optimum the full
    // Newton step can lose O(1e-14) to floating point while shrinking the
    // gradient by orders of magnitude.
    const double slack = 1e-12 * (1.0 + std::abs(ll));
    for (int half = 0; half < 30; ++half) {
      phi_new = fit.phi + step * delta;
      eta_new = z * phi_new;
      ll_new = bernoulli_loglik(eta_new, t);
      if (std::isfinite(ll_new) && ll_new >= ll - slack) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;  // the post-loop gradient check decides
    fit.phi = phi_new;
    eta = eta_new;
    ll = ll_new;
    fit.iterations = iter + 1;
    fit.loglik_history.push_back(ll);

    if (!fit.phi.allFinite() || fit.phi.lpNorm<Eigen::Infinity>() > 250.0) {
      throw Error(Errc::separation, "fit_logistic: coefficients diverged (separation)");
    }
    double max_resid = 0.0;
    Vec prob_new = eta.unaryExpr([](double e) { return expit(e); });
    for (Index i = 0; i < n; ++i) {
      max_resid = std::max(max_resid, std::abs(t[static_cast<std::size_t>(i)] - prob_new[i]));
    }
    if (max_resid < 1e-8) {
      throw Error(Errc::separation, "fit_logistic: perfect fit (separation)");
    }
  }
  if (!fit.converged) {
    Vec prob = eta.unaryExpr([](double e) { return expit(e); });
    Vec resid(n);
    for (Index i = 0; i < n; ++i) resid[i] = t[static_cast<std::size_t>(i)] - prob[i];
    if ((z.transpose() * resid).lpNorm<Eigen::Infinity>() <= grad_tol) {
      fit.converged = true;
    } else {
      throw Error(Errc::convergence_failure, "fit_logistic: no convergence within iteration budget");
    }
  }
  fit.log_likelihood = ll;
  return fit;
}

double predict_propensity(const PropensityFit& fit, const Vec& x) {
  Mat row = x.transpose();
  Mat f = apply_feature_map(row, fit.fmap);
  if (f.cols() + 1 != fit.phi.size()) {
    throw Error(Errc::shape_mismatch, "predict_propensity: covariate dimension mismatch");
  }
  double eta = fit.phi[0] + (f.row(0) * fit.phi.tail(f.cols())).value();
  return std::clamp(expit(eta), fit.eta0, 1.0 - fit.eta0);
}

Vec predict_propensity_batch(const PropensityFit& fit, const Mat& x) {
  Mat f = apply_feature_map(x, fit.fmap);
  if (f.cols() + 1 != fit.phi.size()) {
    throw Error(Errc::shape_mismatch, "predict_propensity_batch: covariate dimension mismatch");
  }
  Vec eta = (f * fit.phi.tail(f.cols())).array() + fit.phi[0];
  Vec out(eta.size());
  for (Index i = 0; i < eta.size(); ++i) {
    out[i] = std::clamp(expit(eta[i]), fit.eta0, 1.0 - fit.eta0);
  }
  return out;
}

}  // namespace gci
