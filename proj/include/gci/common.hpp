#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace gci {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class Errc {
  invalid_argument,   // bad parameters, non-finite inputs
  shape_mismatch,     // dimension disagreements
  infeasible_point,   // point outside the feasible set of its space
  degenerate_geodesic,// identical/antipodal endpoints where a direction is needed
  composition_mismatch,
  convergence_failure,
  separation,         // perfectly separated logistic fit
  degenerate_data,    // single treatment arm, empty sample, ...
  partition_failure,  // fold/split constraints unsatisfiable after retries
  infeasible_level,   // no admissible HulC break count
  parse_error,
  validation_error,
  io_error,
  config_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// Solver failures carry the best iterate found so callers can inspect or
// salvage it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, Vec best, int iterations)
      : Error(Errc::convergence_failure, msg),
        best_(std::move(best)),
        iterations_(iterations) {}
  const Vec& best_iterate() const { return best_; }
  int iterations() const { return iterations_; }

 private:
  Vec best_;
  int iterations_;
};

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// std::mt19937_64 raw output is pinned by the standard, but the std
// distributions are not; every derived draw below is hand-rolled so streams
// are bit-identical across compilers and platforms.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derived stream seed: replicate q of a run seeded s gets mix_seed(s, q).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x9E3779B97F4A7C15ull));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw Error(Errc::invalid_argument, "Rng::below: n must be positive");
    const std::uint64_t zone = (std::numeric_limits<std::uint64_t>::max() / n) * n;
    std::uint64_t x = gen_();
    while (x >= zone) x = gen_();
    return x % n;
  }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  // Box-Muller, one variate per call (the cosine leg); two uniforms consumed.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Fisher-Yates with our own index draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::vector<Index> permutation(Index n) {
    std::vector<Index> p(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    shuffle(p);
    return p;
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

// Numerically stable logistic function.
inline double expit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Standard normal quantile, Wichura's AS 241 (double precision throughout).
double normal_quantile(double p);

// ---------------------------------------------------------------------------
// parallel_for: run fn(i) for i in [0, total) on `jobs` threads.
//
// Work items are claimed through an atomic counter; each item writes only its
// own slot on the caller side, so results are independent of the thread count
// and of scheduling order. The first exception (if any) is rethrown.
// ---------------------------------------------------------------------------

void parallel_for(int total, int jobs, const std::function<void(int)>& fn);

inline int hardware_jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace gci
