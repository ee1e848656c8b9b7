#include "gci/hulc.hpp"

#include <algorithm>
#include <cmath>

namespace gci {
namespace {

constexpr int kMaxSplits = 64;

double one_sided_all(double delta, int b) {
  return std::pow(0.5 - delta, b) + std::pow(0.5 + delta, b);
}

}  // namespace

HulcBreaks hulc_breaks(double alpha, double delta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(Errc::config_error, "hulc_breaks: alpha must lie in (0, 1]");
  }
  if (!(delta >= 0.0 && delta < 0.5)) {
    throw Error(Errc::config_error, "hulc_breaks: delta must lie in [0, 0.5)");
  }
  for (int b = 1; b <= kMaxSplits; ++b) {
    const double p = one_sided_all(delta, b);
    if (p <= alpha) {
      const double p_prev = b == 1 ? 2.0 : one_sided_all(delta, b - 1);
      HulcBreaks out;
      out.b = b;
      out.tau = (alpha - p) / (p_prev - p);
      return out;
    }
  }
  throw Error(Errc::infeasible_level,
              "hulc_breaks: level not reachable within the split budget");
}

HulcInterval hulc_interval(const Sample& sample, const MetricSpace& space,
                           const HulcConfig& cfg, const ContrastFn& contrast) {
  validate_sample(space, sample);
  HulcBreaks breaks = hulc_breaks(cfg.alpha, cfg.delta);

  Rng rng(mix_seed(cfg.seed, 0xB001));
  const double u = rng.uniform();
  int b_star = u <= breaks.tau ? breaks.b : breaks.b - 1;
  b_star = std::max(1, b_star);

  const Index n = sample.n();
  if (n < 4 * static_cast<Index>(b_star)) {
    throw Error(Errc::degenerate_data, "hulc_interval: too few samples for the split count");
  }

  // Near-equal contiguous splits of a random permutation; every split must
  // contain both treatment arms before any estimator can run on it.
  std::vector<std::vector<Index>> splits;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    std::vector<Index> perm = rng.permutation(n);
    splits.assign(static_cast<std::size_t>(b_star), {});
    Index pos = 0;
    for (int b = 0; b < b_star; ++b) {
      Index size = n / b_star + (b < static_cast<int>(n % b_star) ? 1 : 0);
      for (Index j = 0; j < size; ++j) splits[static_cast<std::size_t>(b)].push_back(perm[pos++]);
    }
    bool ok = true;
    for (const auto& split : splits) {
      int arm0 = 0, arm1 = 0;
      for (Index i : split) (sample.t[static_cast<std::size_t>(i)] == 1 ? arm1 : arm0)++;
      if (arm0 == 0 || arm1 == 0) {
        ok = false;
        break;
      }
    }
    if (ok) break;
    splits.clear();
  }
  if (splits.empty()) {
    throw Error(Errc::partition_failure,
                "hulc_interval: no valid split assignment after retry budget");
  }

  HulcInterval out;
  out.b_star = b_star;
  out.breaks = breaks;
  for (int b = 0; b < b_star; ++b) {
    Sample split = subsample(sample, splits[static_cast<std::size_t>(b)]);
    EstimatorConfig est = cfg.estimator;
    est.seed = mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(b));
    out.split_contrasts.push_back(contrast(split, est));
  }
  out.lo = *std::min_element(out.split_contrasts.begin(), out.split_contrasts.end());
  out.hi = *std::max_element(out.split_contrasts.begin(), out.split_contrasts.end());
  return out;
}

HulcInterval hulc_interval(const Sample& sample, const MetricSpace& space,
                           const HulcConfig& cfg) {
  return hulc_interval(sample, space, cfg,
                       [&space, &cfg](const Sample& split, const EstimatorConfig& est) {
                         return estimate_gate(split, space, cfg.method, est).contrast;
                       });
}

}  // namespace gci
