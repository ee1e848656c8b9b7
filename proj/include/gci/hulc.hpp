#pragma once

#include <functional>
#include <vector>

#include "gci/estimators.hpp"

namespace gci {

// Split-count solution for a target miscoverage alpha and median bias delta.
// p(b) = (1/2 - delta)^b + (1/2 + delta)^b is the chance that b independent
// estimates all land on one side of the target; b is the smallest count with
// p(b) <= alpha and tau the randomization weight that hits alpha exactly.
struct HulcBreaks {
  int b = 0;
  double tau = 0.0;
};

HulcBreaks hulc_breaks(double alpha, double delta);

struct HulcConfig {
  double alpha = 0.05;
  double delta = 0.0;
  std::uint64_t seed = 0;
  GateMethod method = GateMethod::dr;
  EstimatorConfig estimator;
  int max_retries = 100;
};

struct HulcInterval {
  double lo = 0.0;
  double hi = 0.0;
  int b_star = 0;          // realized split count
  HulcBreaks breaks;       // deterministic part of the split-count solution
  std::vector<double> split_contrasts;
};

// Per-split statistic: receives the split's subsample and a config whose seed
// has been re-mixed for that split.
using ContrastFn = std::function<double(const Sample&, const EstimatorConfig&)>;

// Convex hull interval over B* random-split estimates of the effect size.
HulcInterval hulc_interval(const Sample& sample, const MetricSpace& space,
                           const HulcConfig& cfg, const ContrastFn& contrast);

// Same, with the statistic fixed to estimate_gate(...).contrast for cfg.method.
HulcInterval hulc_interval(const Sample& sample, const MetricSpace& space,
                           const HulcConfig& cfg);

}  // namespace gci
