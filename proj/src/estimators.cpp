#include "gci/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gci {
namespace {

long take_iterations(const SolverDiagnostics& diag) { return diag.iterations; }

// Pseudo-outcome for one unit: slide from the regression prediction toward
// (or past) the observed outcome by the inverse-propensity parameter. The
// extension is taken in the enveloping geodesically complete space — flat
// spaces extend affinely, the sphere along the full great circle — so the
// inverse weighting keeps its averaging identities even when a target
// overshoots the feasible set; the constrained Fréchet mean of the targets
// is what restores feasibility (and is all the estimators ever report).
std::vector<Vec> pseudo_outcomes(const MetricSpace& space, const std::vector<Vec>& preds,
                                 const std::vector<Vec>& y, const Vec& kappa) {
  std::vector<Vec> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double k = kappa[static_cast<Index>(i)];
    if (k == 0.0) {
      out[i] = preds[i];
      continue;
    }
    const double d = space.distance(preds[i], y[i]);
    if (d <= 1e-14 * (1.0 + preds[i].norm() + y[i].norm())) {
      out[i] = preds[i];  // identity convention: extending id_a stays at a
    } else {
      out[i] = space.geodesic_point(preds[i], y[i], k);
    }
  }
  return out;
}

Vec unweighted_mean(const MetricSpace& space, const std::vector<Vec>& pts,
                    const SolverOptions& opt, long& iter_accum) {
  SolverDiagnostics diag;
  Vec w = Vec::Ones(static_cast<Index>(pts.size()));
  Vec mean = space.weighted_mean(pts, w, opt, &diag);
  iter_accum += take_iterations(diag);
  return mean;
}

GateEstimate finish(const MetricSpace& space, Vec theta0, Vec theta1, GateMethod method,
                    GateDiagnostics diag) {
  GeodesicSegment gate(space, theta0, theta1);
  const double contrast = gate.length();
  return GateEstimate{std::move(theta0), std::move(theta1), std::move(gate),
                      contrast, method, std::move(diag)};
}

void check_models(const Sample& sample, const GfrModel& m0, const GfrModel& m1) {
  if (m0.group() != 0 || m1.group() != 1) {
    throw Error(Errc::invalid_argument, "estimator: regression models must cover groups 0 and 1");
  }
  if (m0.n_total() != sample.n() || m1.n_total() != sample.n()) {
    throw Error(Errc::shape_mismatch,
                "estimator: regression models were not fitted on this sample");
  }
}

}  // namespace

void validate_sample(const MetricSpace& space, const Sample& sample) {
  const Index n = sample.x.rows();
  if (n == 0) throw Error(Errc::degenerate_data, "sample is empty");
  if (static_cast<Index>(sample.t.size()) != n || static_cast<Index>(sample.y.size()) != n) {
    throw Error(Errc::shape_mismatch, "sample fields disagree in length");
  }
  if (!sample.x.allFinite()) throw Error(Errc::invalid_argument, "sample has non-finite covariates");
  for (Index i = 0; i < n; ++i) {
    const int ti = sample.t[static_cast<std::size_t>(i)];
    if (ti != 0 && ti != 1) {
      throw Error(Errc::validation_error, "treatment indicators must be 0 or 1");
    }
    space.check_point(sample.y[static_cast<std::size_t>(i)], "sample outcome");
  }
}

Sample subsample(const Sample& sample, const std::vector<Index>& rows) {
  Sample out;
  out.x.resize(static_cast<Index>(rows.size()), sample.x.cols());
  out.t.reserve(rows.size());
  out.y.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.x.row(static_cast<Index>(k)) = sample.x.row(rows[k]);
    out.t.push_back(sample.t[static_cast<std::size_t>(rows[k])]);
    out.y.push_back(sample.y[static_cast<std::size_t>(rows[k])]);
  }
  return out;
}

std::string to_string(GateMethod method) {
  switch (method) {
    case GateMethod::dr: return "dr";
    case GateMethod::cf: return "cf";
    case GateMethod::or_reg: return "or";
    case GateMethod::ipw: return "ipw";
  }
  throw Error(Errc::invalid_argument, "unknown estimator method");
}

GateMethod gate_method_from_string(const std::string& s) {
  if (s == "dr") return GateMethod::dr;
  if (s == "cf") return GateMethod::cf;
  if (s == "or") return GateMethod::or_reg;
  if (s == "ipw") return GateMethod::ipw;
  throw Error(Errc::config_error, "unknown estimator method: " + s);
}

WeightSummary summarize_weights(const Vec& w) {
  WeightSummary s;
  double sum = 0.0;
  Index nonzero = 0;
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) {
      ++s.zeros;
      continue;
    }
    if (nonzero == 0) {
      s.min = s.max = w[i];
    } else {
      s.min = std::min(s.min, w[i]);
      s.max = std::max(s.max, w[i]);
    }
    sum += w[i];
    ++nonzero;
  }
  s.mean = nonzero > 0 ? sum / static_cast<double>(nonzero) : 0.0;
  return s;
}

Vec kappa_weights(int arm, const std::vector<int>& t, const Vec& ehat) {
  if (arm != 0 && arm != 1) throw Error(Errc::invalid_argument, "kappa_weights: arm must be 0 or 1");
  if (static_cast<Index>(t.size()) != ehat.size()) {
    throw Error(Errc::shape_mismatch, "kappa_weights: lengths disagree");
  }
  Vec k(ehat.size());
  for (Index i = 0; i < ehat.size(); ++i) {
    const int ti = t[static_cast<std::size_t>(i)];
    k[i] = arm == 1 ? (ti == 1 ? 1.0 / ehat[i] : 0.0)
                    : (ti == 0 ? 1.0 / (1.0 - ehat[i]) : 0.0);
  }
  return k;
}

GateEstimate dr_estimate(const Sample& sample, const MetricSpace& space, const GfrModel& m0,
                         const GfrModel& m1, const PropensityFit& ps,
                         const EstimatorConfig& cfg) {
  validate_sample(space, sample);
  check_models(sample, m0, m1);

  GateDiagnostics diag;
  diag.propensity_iterations = ps.iterations;

  Vec ehat = predict_propensity_batch(ps, sample.x);
  Vec kappa0 = kappa_weights(0, sample.t, ehat);
  Vec kappa1 = kappa_weights(1, sample.t, ehat);
  diag.kappa0 = summarize_weights(kappa0);
  diag.kappa1 = summarize_weights(kappa1);

  std::vector<Vec> preds0 = m0.predict_training(cfg.solver);
  std::vector<Vec> preds1 = m1.predict_training(cfg.solver);

  std::vector<Vec> a0 = pseudo_outcomes(space, preds0, sample.y, kappa0);
  std::vector<Vec> a1 = pseudo_outcomes(space, preds1, sample.y, kappa1);

  Vec theta0 = unweighted_mean(space, a0, cfg.solver, diag.solver_iterations);
  Vec theta1 = unweighted_mean(space, a1, cfg.solver, diag.solver_iterations);
  return finish(space, std::move(theta0), std::move(theta1), GateMethod::dr, std::move(diag));
}

GateEstimate cf_estimate(const Sample& sample, const MetricSpace& space,
                         const EstimatorConfig& cfg) {
  validate_sample(space, sample);
  const Index n = sample.n();
  if (cfg.folds < 2) throw Error(Errc::config_error, "cf_estimate: folds must be at least 2");
  if (n < cfg.folds) throw Error(Errc::degenerate_data, "cf_estimate: fewer samples than folds");

  const int k_folds = cfg.folds;
  Rng rng(mix_seed(cfg.seed, 0xCF01));

  // Near-equal contiguous slices of a random permutation; every fold's
  // complement must contain both treatment arms before nuisances can be fit.
  std::vector<std::vector<Index>> folds;
  int retries = 0;
  for (int attempt = 0; attempt <= cfg.partition_retries; ++attempt) {
    std::vector<Index> perm = rng.permutation(n);
    folds.assign(static_cast<std::size_t>(k_folds), {});
    Index pos = 0;
    for (int k = 0; k < k_folds; ++k) {
      Index size = n / k_folds + (k < static_cast<int>(n % k_folds) ? 1 : 0);
      for (Index j = 0; j < size; ++j) folds[static_cast<std::size_t>(k)].push_back(perm[pos++]);
    }
    bool ok = true;
    for (int k = 0; k < k_folds && ok; ++k) {
      int arm0 = 0, arm1 = 0;
      for (int kk = 0; kk < k_folds; ++kk) {
        if (kk == k) continue;
        for (Index i : folds[static_cast<std::size_t>(kk)]) {
          (sample.t[static_cast<std::size_t>(i)] == 1 ? arm1 : arm0)++;
        }
      }
      ok = arm0 > 0 && arm1 > 0;
    }
    if (ok) break;
    folds.clear();
    ++retries;
  }
  if (folds.empty()) {
    throw Error(Errc::partition_failure,
                "cf_estimate: no valid fold partition after retry budget");
  }

  GateDiagnostics diag;
  diag.folds = k_folds;
  diag.partition_retries = retries;

  Mat or_x = apply_feature_map(sample.x, cfg.or_fmap);

  std::vector<Vec> theta0_folds, theta1_folds;
  Vec fold_weights(k_folds);
  Vec kappa0_all = Vec::Zero(n), kappa1_all = Vec::Zero(n);
  for (int k = 0; k < k_folds; ++k) {
    const auto& fold = folds[static_cast<std::size_t>(k)];
    std::vector<Index> comp;
    comp.reserve(static_cast<std::size_t>(n) - fold.size());
    for (int kk = 0; kk < k_folds; ++kk) {
      if (kk == k) continue;
      comp.insert(comp.end(), folds[static_cast<std::size_t>(kk)].begin(),
                  folds[static_cast<std::size_t>(kk)].end());
    }
    std::sort(comp.begin(), comp.end());

    Sample train = subsample(sample, comp);
    Mat train_or_x(static_cast<Index>(comp.size()), or_x.cols());
    for (std::size_t j = 0; j < comp.size(); ++j) train_or_x.row(static_cast<Index>(j)) = or_x.row(comp[j]);

    GfrModel m0 = GfrModel::fit(space, train_or_x, train.t, train.y, 0);
    GfrModel m1 = GfrModel::fit(space, train_or_x, train.t, train.y, 1);
    PropensityFit ps = fit_logistic(train.x, train.t, cfg.ps_fmap, cfg.eta0);
    diag.propensity_iterations += ps.iterations;

    Sample eval = subsample(sample, fold);
    Mat eval_or_x(static_cast<Index>(fold.size()), or_x.cols());
    for (std::size_t j = 0; j < fold.size(); ++j) eval_or_x.row(static_cast<Index>(j)) = or_x.row(fold[j]);

    std::vector<Vec> preds0 = m0.predict_batch(eval_or_x, cfg.solver);
    std::vector<Vec> preds1 = m1.predict_batch(eval_or_x, cfg.solver);
    Vec ehat = predict_propensity_batch(ps, eval.x);
    Vec kappa0 = kappa_weights(0, eval.t, ehat);
    Vec kappa1 = kappa_weights(1, eval.t, ehat);
    for (std::size_t j = 0; j < fold.size(); ++j) {
      kappa0_all[fold[j]] = kappa0[static_cast<Index>(j)];
      kappa1_all[fold[j]] = kappa1[static_cast<Index>(j)];
    }

    std::vector<Vec> a0 = pseudo_outcomes(space, preds0, eval.y, kappa0);
    std::vector<Vec> a1 = pseudo_outcomes(space, preds1, eval.y, kappa1);
    theta0_folds.push_back(unweighted_mean(space, a0, cfg.solver, diag.solver_iterations));
    theta1_folds.push_back(unweighted_mean(space, a1, cfg.solver, diag.solver_iterations));
    fold_weights[k] = static_cast<double>(fold.size()) / static_cast<double>(n);
  }
  diag.kappa0 = summarize_weights(kappa0_all);
  diag.kappa1 = summarize_weights(kappa1_all);

  SolverDiagnostics sd;
  Vec theta0 = space.weighted_mean(theta0_folds, fold_weights, cfg.solver, &sd);
  diag.solver_iterations += take_iterations(sd);
  Vec theta1 = space.weighted_mean(theta1_folds, fold_weights, cfg.solver, &sd);
  diag.solver_iterations += take_iterations(sd);
  return finish(space, std::move(theta0), std::move(theta1), GateMethod::cf, std::move(diag));
}

GateEstimate or_estimate(const Sample& sample, const MetricSpace& space, const GfrModel& m0,
                         const GfrModel& m1, const EstimatorConfig& cfg) {
  validate_sample(space, sample);
  check_models(sample, m0, m1);

  GateDiagnostics diag;
  std::vector<Vec> preds0 = m0.predict_training(cfg.solver);
  std::vector<Vec> preds1 = m1.predict_training(cfg.solver);
  Vec theta0 = unweighted_mean(space, preds0, cfg.solver, diag.solver_iterations);
  Vec theta1 = unweighted_mean(space, preds1, cfg.solver, diag.solver_iterations);
  return finish(space, std::move(theta0), std::move(theta1), GateMethod::or_reg, std::move(diag));
}

GateEstimate ipw_estimate(const Sample& sample, const MetricSpace& space,
                          const PropensityFit& ps, const EstimatorConfig& cfg) {
  validate_sample(space, sample);

  GateDiagnostics diag;
  diag.propensity_iterations = ps.iterations;

  Vec ehat = predict_propensity_batch(ps, sample.x);
  Vec kappa0 = kappa_weights(0, sample.t, ehat);
  Vec kappa1 = kappa_weights(1, sample.t, ehat);
  diag.kappa0 = summarize_weights(kappa0);
  diag.kappa1 = summarize_weights(kappa1);

  // Anchor: pooled Fréchet mean of every outcome; off-arm units stay there.
  Vec anchor = unweighted_mean(space, sample.y, cfg.solver, diag.solver_iterations);
  std::vector<Vec> anchors(sample.y.size(), anchor);
  std::vector<Vec> a0 = pseudo_outcomes(space, anchors, sample.y, kappa0);
  std::vector<Vec> a1 = pseudo_outcomes(space, anchors, sample.y, kappa1);
  Vec theta0 = unweighted_mean(space, a0, cfg.solver, diag.solver_iterations);
  Vec theta1 = unweighted_mean(space, a1, cfg.solver, diag.solver_iterations);
  return finish(space, std::move(theta0), std::move(theta1), GateMethod::ipw, std::move(diag));
}

GateEstimate estimate_gate(const Sample& sample, const MetricSpace& space, GateMethod method,
                           const EstimatorConfig& cfg) {
  validate_sample(space, sample);
  switch (method) {
    case GateMethod::cf:
      return cf_estimate(sample, space, cfg);
    case GateMethod::dr: {
      Mat or_x = apply_feature_map(sample.x, cfg.or_fmap);
      GfrModel m0 = GfrModel::fit(space, or_x, sample.t, sample.y, 0);
      GfrModel m1 = GfrModel::fit(space, or_x, sample.t, sample.y, 1);
      PropensityFit ps = fit_logistic(sample.x, sample.t, cfg.ps_fmap, cfg.eta0);
      return dr_estimate(sample, space, m0, m1, ps, cfg);
    }
    case GateMethod::or_reg: {
      Mat or_x = apply_feature_map(sample.x, cfg.or_fmap);
      GfrModel m0 = GfrModel::fit(space, or_x, sample.t, sample.y, 0);
      GfrModel m1 = GfrModel::fit(space, or_x, sample.t, sample.y, 1);
      return or_estimate(sample, space, m0, m1, cfg);
    }
    case GateMethod::ipw: {
      PropensityFit ps = fit_logistic(sample.x, sample.t, cfg.ps_fmap, cfg.eta0);
      return ipw_estimate(sample, space, ps, cfg);
    }
  }
  throw Error(Errc::invalid_argument, "unknown estimator method");
}

}  // namespace gci
