#pragma once

#include "gci/flat_space.hpp"

namespace gci {

// 1-D distributions represented by their quantile functions sampled on the
// fixed midpoint grid p_k = (k + 1/2)/G, k = 0..G-1. On quantile functions the
// 2-Wasserstein distance is the L2([0,1]) norm of the difference, approximated
// on the grid as |a - b|_2 / sqrt(G); geodesics (McCann interpolants) are
// entrywise linear. The feasible set is the cone of nondecreasing vectors.
class WassersteinSpace : public FlatSpace {
 public:
  explicit WassersteinSpace(Index grid_size = 201);

  std::string name() const override { return "wasserstein"; }
  Index ambient_dim() const override { return g_; }

  bool contains(const Vec& y, double tol = 1e-9) const override;
  // Exact L2 projection onto the monotone cone (pool adjacent violators).
  Vec project(const Vec& y) const override;

  Index grid_size() const { return g_; }
  Vec grid() const;  // the probability levels p_k

  // Quantile values of the empirical distribution of raw samples, linearly
  // interpolated between order statistics at positions p_k (n - 1).
  Vec empirical_quantiles(const Vec& samples) const;
  // Quantiles of N(mu, sigma^2) on the grid; handy for tests and examples.
  Vec gaussian_quantiles(double mu, double sigma) const;

 protected:
  double metric_scale() const override { return inv_sqrt_g_; }

 private:
  Index g_;
  double inv_sqrt_g_;
};

}  // namespace gci
