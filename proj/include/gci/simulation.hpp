#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gci/estimators.hpp"

namespace gci {

enum class ScenarioSpace { covariance, compositional };

std::string to_string(ScenarioSpace s);
ScenarioSpace scenario_space_from_string(const std::string& s);

// The ambient space each scenario lives in: 10x10 diagonally dominant PSD
// matrices under the Frobenius metric, or the positive orthant of S^2.
std::unique_ptr<MetricSpace> make_scenario_space(ScenarioSpace s);

// Noiseless conditional means of the two designs.
Vec covariance_mean_matrix(int t, double x);  // flattened 10x10
Vec compositional_mean(int t, double x);      // unit 3-vector

// Marginal effect targets (theta_0, theta_1) of each design.
std::pair<Vec, Vec> covariance_truth();
std::pair<Vec, Vec> compositional_truth();

// Single-covariate designs: x ~ U(-1,1), T ~ Bernoulli(expit(0.75 x)).
//
// Covariance design: every off-diagonal entry is T + x + 2 plus an
// independent U(-noise, noise) draw (lower triangle in row-major order, then
// mirrored), and each diagonal entry is its row's off-diagonal sum.
Sample gen_covariance(Index n, Rng& rng, double noise = 0.1);

// Compositional design: the mean direction m_t(x) is perturbed along an
// orthonormal tangent basis by two independent U(-noise, noise) draws and
// mapped back to the sphere through the exponential map.
Sample gen_compositional(Index n, Rng& rng, double noise = 0.1);

// Replicate-averaged error statistics against the effect targets:
//   ase  — mean over replicates of d^2(th0,T0) + d^2(th1,T1)
//   asd  — mean over replicates of d(th0,T0) + d(th1,T1)
// with their sample standard deviations across replicates.
struct AseStats {
  double ase = 0.0;
  double ase_sd = 0.0;
  double asd = 0.0;
  double asd_sd = 0.0;
};

AseStats ase_stats(const std::vector<GateEstimate>& estimates, const Vec& truth0,
                   const Vec& truth1, const MetricSpace& space);
double ase(const std::vector<GateEstimate>& estimates, const Vec& truth0, const Vec& truth1,
           const MetricSpace& space);

struct ScenarioSpec {
  ScenarioSpace space = ScenarioSpace::covariance;
  Index n = 100;
  int replicates = 100;
  std::uint64_t seed = 0;
  bool or_correct = true;
  bool ps_correct = true;
  double noise = 0.1;
  double eta0 = 0.05;
  int folds = 5;
  std::vector<GateMethod> methods{GateMethod::dr, GateMethod::cf, GateMethod::or_reg,
                                  GateMethod::ipw};
  int jobs = 0;  // 0 = all hardware threads
};

struct MethodResult {
  GateMethod method;
  AseStats stats;
  int failures = 0;  // replicates whose estimate raised an error
};

struct ScenarioReport {
  ScenarioSpec spec;
  std::vector<MethodResult> rows;
  bool theory_supported = true;
};

// Runs `replicates` independent draws (replicate q is seeded with
// mix_seed(seed, q), so the result is independent of the job count), fits the
// nuisances once per replicate, shares them across DR/OR/IPW, and reduces to
// per-method error statistics. Failed replicates are excluded and counted.
ScenarioReport run_scenario(const ScenarioSpec& spec);

// Deterministic plain-text renderings of a report (no timestamps).
std::string report_csv(const ScenarioReport& report);
std::string report_text(const ScenarioReport& report);

}  // namespace gci
