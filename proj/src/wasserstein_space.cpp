#include "gci/wasserstein_space.hpp"

#include <algorithm>

namespace gci {

WassersteinSpace::WassersteinSpace(Index grid_size)
    : g_(grid_size), inv_sqrt_g_(1.0 / std::sqrt(static_cast<double>(grid_size))) {
  if (grid_size < 2) {
    throw Error(Errc::invalid_argument, "WassersteinSpace: grid size must be >= 2");
  }
}

bool WassersteinSpace::contains(const Vec& y, double tol) const {
  if (y.size() != g_ || !y.allFinite()) return false;
  for (Index k = 0; k + 1 < g_; ++k) {
    if (y[k + 1] < y[k] - tol) return false;
  }
  return true;
}

Vec WassersteinSpace::project(const Vec& y) const {
  check_dim(y, "project");
  if (!y.allFinite()) throw Error(Errc::invalid_argument, "project: non-finite entries");
  if (contains(y)) return y;
  // Pool adjacent violators: maintain a stack of blocks with their means and
  // merge while the means decrease; the result is the exact L2 isotonic fit.
  std::vector<double> value;
  std::vector<Index> count;
  value.reserve(static_cast<std::size_t>(g_));
  count.reserve(static_cast<std::size_t>(g_));
  for (Index k = 0; k < g_; ++k) {
    double v = y[k];
    Index c = 1;
    while (!value.empty() && value.back() > v) {
      v = (v * static_cast<double>(c) + value.back() * static_cast<double>(count.back())) /
          static_cast<double>(c + count.back());
      c += count.back();
      value.pop_back();
      count.pop_back();
    }
    value.push_back(v);
    count.push_back(c);
  }
  Vec out(g_);
  Index k = 0;
  for (std::size_t b = 0; b < value.size(); ++b) {
    for (Index i = 0; i < count[b]; ++i) out[k++] = value[b];
  }
  return out;
}

Vec WassersteinSpace::grid() const {
  Vec p(g_);
  for (Index k = 0; k < g_; ++k) {
    p[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(g_);
  }
  return p;
}

Vec WassersteinSpace::empirical_quantiles(const Vec& samples) const {
  if (samples.size() < 1) {
    throw Error(Errc::degenerate_data, "empirical_quantiles: empty sample");
  }
  if (!samples.allFinite()) {
    throw Error(Errc::invalid_argument, "empirical_quantiles: non-finite samples");
  }
  std::vector<double> sorted(samples.data(), samples.data() + samples.size());
  std::sort(sorted.begin(), sorted.end());
  const Index n = static_cast<Index>(sorted.size());
  Vec q(g_);
  for (Index k = 0; k < g_; ++k) {
    const double h = ((static_cast<double>(k) + 0.5) / static_cast<double>(g_)) *
                     static_cast<double>(n - 1);
    const Index lo = static_cast<Index>(std::floor(h));
    const Index hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    q[k] = sorted[static_cast<std::size_t>(lo)] * (1.0 - frac) +
           sorted[static_cast<std::size_t>(hi)] * frac;
  }
  return q;
}

Vec WassersteinSpace::gaussian_quantiles(double mu, double sigma) const {
  if (!(sigma >= 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
    throw Error(Errc::invalid_argument, "gaussian_quantiles: bad parameters");
  }
  Vec q(g_);
  for (Index k = 0; k < g_; ++k) {
    q[k] = mu + sigma * normal_quantile((static_cast<double>(k) + 0.5) /
                                        static_cast<double>(g_));
  }
  return q;
}

}  // namespace gci
