#pragma once

#include <string>
#include <vector>

#include "gci/frechet.hpp"
#include "gci/propensity.hpp"
#include "gci/space.hpp"

namespace gci {

// One observational study: covariates, binary treatment, outcomes in a
// geodesic metric space.
struct Sample {
  Mat x;
  std::vector<int> t;
  std::vector<Vec> y;

  Index n() const { return x.rows(); }
};

// Shape and feasibility checks shared by every estimator entry point.
void validate_sample(const MetricSpace& space, const Sample& sample);

// Row subset of a sample, preserving order of `rows`.
Sample subsample(const Sample& sample, const std::vector<Index>& rows);

enum class GateMethod { dr, cf, or_reg, ipw };

std::string to_string(GateMethod method);
GateMethod gate_method_from_string(const std::string& s);

struct EstimatorConfig {
  double eta0 = 0.05;
  int folds = 5;
  std::uint64_t seed = 0;
  int partition_retries = 100;
  FeatureMap or_fmap = FeatureMap::identity;
  FeatureMap ps_fmap = FeatureMap::identity;
  SolverOptions solver;
};

// Summary over the nonzero entries of a weight vector.
struct WeightSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  Index zeros = 0;
};

WeightSummary summarize_weights(const Vec& w);

struct GateDiagnostics {
  long solver_iterations = 0;      // Fréchet-mean iterations across all solves
  int propensity_iterations = 0;   // Newton steps of the logistic fit (if any)
  WeightSummary kappa0, kappa1;    // inverse-propensity weights per arm
  int folds = 0;                   // cross-fitting only
  int partition_retries = 0;       // cross-fitting only
  bool theory_supported = true;    // cleared when both nuisances are declared misspecified
};

struct GateEstimate {
  Vec theta0;
  Vec theta1;
  GeodesicSegment gate;  // geodesic from theta0 to theta1
  double contrast;       // d(theta0, theta1) == gate.length()
  GateMethod method;
  GateDiagnostics diagnostics;
};

// κ_{t,i} = t·T_i/e_i + (1-t)·(1-T_i)/(1-e_i): zero off-arm, otherwise the
// clipped inverse propensity (so κ ∈ {0} ∪ [1/(1-eta0), 1/eta0]).
Vec kappa_weights(int arm, const std::vector<int>& t, const Vec& ehat);

// Doubly robust estimate from pre-fitted nuisances. The regression models
// must have been fitted on this sample (their stored covariates are the
// prediction queries), the propensity fit applies its own feature map.
GateEstimate dr_estimate(const Sample& sample, const MetricSpace& space, const GfrModel& m0,
                         const GfrModel& m1, const PropensityFit& ps,
                         const EstimatorConfig& cfg = {});

// K-fold cross-fitted variant: nuisances are re-fitted on each fold's
// complement, fold estimates are pooled by a fold-size weighted Fréchet mean.
GateEstimate cf_estimate(const Sample& sample, const MetricSpace& space,
                         const EstimatorConfig& cfg = {});

// Outcome-regression-only estimate: per-arm means of regression predictions.
GateEstimate or_estimate(const Sample& sample, const MetricSpace& space, const GfrModel& m0,
                         const GfrModel& m1, const EstimatorConfig& cfg = {});

// Inverse-propensity-weighted estimate anchored at the pooled Fréchet mean.
GateEstimate ipw_estimate(const Sample& sample, const MetricSpace& space,
                          const PropensityFit& ps, const EstimatorConfig& cfg = {});

// Fits whatever nuisances `method` needs (honouring cfg feature maps) and
// dispatches; the path used by the command line and by confidence intervals.
GateEstimate estimate_gate(const Sample& sample, const MetricSpace& space, GateMethod method,
                           const EstimatorConfig& cfg = {});

}  // namespace gci
