#include "gci/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <optional>

#include "gci/frobenius_space.hpp"
#include "gci/sphere_space.hpp"

namespace gci {
namespace {

constexpr Index kMatrixDim = 10;

double expit_mean(double x) { return expit(0.75 * x); }

double phi_of(double x) { return M_PI * (x + 2.0) / 8.0; }

Vec flatten(const Mat& a) { return Eigen::Map<const Vec>(a.data(), a.size()); }

void format_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  out += buf;
}

}  // namespace

std::string to_string(ScenarioSpace s) {
  return s == ScenarioSpace::covariance ? "covariance" : "compositional";
}

ScenarioSpace scenario_space_from_string(const std::string& s) {
  if (s == "covariance") return ScenarioSpace::covariance;
  if (s == "compositional") return ScenarioSpace::compositional;
  throw Error(Errc::config_error, "unknown scenario space: " + s);
}

std::unique_ptr<MetricSpace> make_scenario_space(ScenarioSpace s) {
  if (s == ScenarioSpace::covariance) {
    return std::make_unique<FrobeniusSpace>(kMatrixDim, SymKind::diag_dominant_psd);
  }
  return std::make_unique<SphereSpace>(3);
}

Vec covariance_mean_matrix(int t, double x) {
  const double off = t + x + 2.0;
  Mat a = Mat::Constant(kMatrixDim, kMatrixDim, off);
  a.diagonal().setConstant(off * static_cast<double>(kMatrixDim - 1));
  return flatten(a);
}

Vec compositional_mean(int t, double x) {
  const double phi = phi_of(x);
  Vec m(3);
  if (t == 0) {
    m << std::cos(phi), 0.5 * std::sin(phi), std::sqrt(3.0) / 2.0 * std::sin(phi);
  } else {
    m << std::cos(phi), std::sqrt(3.0) / 2.0 * std::sin(phi), 0.5 * std::sin(phi);
  }
  return m;
}

std::pair<Vec, Vec> covariance_truth() {
  return {covariance_mean_matrix(0, 0.0), covariance_mean_matrix(1, 0.0)};
}

std::pair<Vec, Vec> compositional_truth() {
  return {compositional_mean(0, 0.0), compositional_mean(1, 0.0)};
}

Sample gen_covariance(Index n, Rng& rng, double noise) {
  Sample s;
  s.x.resize(n, 1);
  s.t.reserve(static_cast<std::size_t>(n));
  s.y.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const int t = rng.bernoulli(expit_mean(x)) ? 1 : 0;
    s.x(i, 0) = x;
    s.t.push_back(t);

    Mat a = Mat::Zero(kMatrixDim, kMatrixDim);
    const double base = t + x + 2.0;
    for (Index j = 1; j < kMatrixDim; ++j) {
      for (Index k = 0; k < j; ++k) {
        const double v = base + rng.uniform(-noise, noise);
        a(j, k) = v;
        a(k, j) = v;
      }
    }
    for (Index j = 0; j < kMatrixDim; ++j) {
      a(j, j) = a.row(j).sum();  // diagonal not yet set, so this is the off-diagonal sum
    }
    s.y.push_back(flatten(a));
  }
  return s;
}

Sample gen_compositional(Index n, Rng& rng, double noise) {
  Sample s;
  s.x.resize(n, 1);
  s.t.reserve(static_cast<std::size_t>(n));
  s.y.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const int t = rng.bernoulli(expit_mean(x)) ? 1 : 0;
    s.x(i, 0) = x;
    s.t.push_back(t);

    const double phi = phi_of(x);
    const double c = std::cos(phi), d = std::sin(phi);
    const double h = 0.5, g = std::sqrt(3.0) / 2.0;
    Vec m(3), e1(3), e2(3);
    if (t == 0) {
      m << c, h * d, g * d;
      e1 << d, -h * c, -g * c;
      e2 << 0.0, g, -h;
    } else {
      m << c, g * d, h * d;
      e1 << d, -g * c, -h * c;
      e2 << 0.0, h, -g;
    }
    const double z1 = rng.uniform(-noise, noise);
    const double z2 = rng.uniform(-noise, noise);
    Vec u = z1 * e1 + z2 * e2;
    const double r = u.norm();
    Vec y = r < 1e-300 ? m : Vec(std::cos(r) * m + std::sin(r) / r * u);
    s.y.push_back(y);
  }
  return s;
}

AseStats ase_stats(const std::vector<GateEstimate>& estimates, const Vec& truth0,
                   const Vec& truth1, const MetricSpace& space) {
  space.check_point(truth0, "effect target");
  space.check_point(truth1, "effect target");
  AseStats out;
  const std::size_t q = estimates.size();
  if (q == 0) return out;

  std::vector<double> sq(q), li(q);
  for (std::size_t i = 0; i < q; ++i) {
    const double d0 = space.distance(estimates[i].theta0, truth0);
    const double d1 = space.distance(estimates[i].theta1, truth1);
    sq[i] = d0 * d0 + d1 * d1;
    li[i] = d0 + d1;
    out.ase += sq[i];
    out.asd += li[i];
  }
  out.ase /= static_cast<double>(q);
  out.asd /= static_cast<double>(q);
  if (q > 1) {
    double v2 = 0.0, v1 = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      v2 += (sq[i] - out.ase) * (sq[i] - out.ase);
      v1 += (li[i] - out.asd) * (li[i] - out.asd);
    }
    out.ase_sd = std::sqrt(v2 / static_cast<double>(q - 1));
    out.asd_sd = std::sqrt(v1 / static_cast<double>(q - 1));
  }
  return out;
}

double ase(const std::vector<GateEstimate>& estimates, const Vec& truth0, const Vec& truth1,
           const MetricSpace& space) {
  return ase_stats(estimates, truth0, truth1, space).ase;
}

ScenarioReport run_scenario(const ScenarioSpec& spec) {
  if (spec.n < 20) throw Error(Errc::config_error, "run_scenario: n must be at least 20");
  if (spec.replicates < 1) throw Error(Errc::config_error, "run_scenario: replicates must be positive");
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
    throw Error(Errc::config_error, "run_scenario: noise must be a finite nonnegative number");
  }
  if (!(spec.eta0 > 0.0 && spec.eta0 < 0.5)) {
    throw Error(Errc::config_error, "run_scenario: eta0 must lie in (0, 0.5)");
  }
  if (spec.folds < 2) throw Error(Errc::config_error, "run_scenario: folds must be at least 2");
  if (spec.methods.empty()) throw Error(Errc::config_error, "run_scenario: no methods requested");

  std::unique_ptr<MetricSpace> space = make_scenario_space(spec.space);
  const auto [truth0, truth1] = spec.space == ScenarioSpace::covariance
                                    ? covariance_truth()
                                    : compositional_truth();

  const std::size_t n_methods = spec.methods.size();
  const int q_total = spec.replicates;
  const bool theory = spec.or_correct || spec.ps_correct;
  const FeatureMap or_fmap = spec.or_correct ? FeatureMap::identity : FeatureMap::square;
  const FeatureMap ps_fmap = spec.ps_correct ? FeatureMap::identity : FeatureMap::square;

  bool need_reg = false, need_ps = false;
  for (GateMethod m : spec.methods) {
    need_reg |= (m == GateMethod::dr || m == GateMethod::or_reg);
    need_ps |= (m == GateMethod::dr || m == GateMethod::ipw);
  }

  // slots[m][q]: per-replicate result, written by exactly one worker.
  std::vector<std::vector<std::optional<GateEstimate>>> slots(n_methods);
  for (auto& v : slots) v.resize(static_cast<std::size_t>(q_total));

  const int jobs = spec.jobs > 0 ? spec.jobs : hardware_jobs();
  parallel_for(static_cast<std::size_t>(q_total), jobs, [&](std::size_t q) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(q)));
    Sample sample = spec.space == ScenarioSpace::covariance
                        ? gen_covariance(spec.n, rng, spec.noise)
                        : gen_compositional(spec.n, rng, spec.noise);

    EstimatorConfig cfg;
    cfg.eta0 = spec.eta0;
    cfg.folds = spec.folds;
    cfg.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(q));
    cfg.or_fmap = or_fmap;
    cfg.ps_fmap = ps_fmap;

    std::optional<GfrModel> m0, m1;
    std::optional<PropensityFit> ps;
    if (need_reg) {
      try {
        Mat or_x = apply_feature_map(sample.x, or_fmap);
        m0 = GfrModel::fit(*space, or_x, sample.t, sample.y, 0);
        m1 = GfrModel::fit(*space, or_x, sample.t, sample.y, 1);
      } catch (const Error&) {
        m0.reset();
        m1.reset();
      }
    }
    if (need_ps) {
      try {
        ps = fit_logistic(sample.x, sample.t, ps_fmap, spec.eta0);
      } catch (const Error&) {
        ps.reset();
      }
    }

    for (std::size_t m = 0; m < n_methods; ++m) {
      try {
        std::optional<GateEstimate> est;
        switch (spec.methods[m]) {
          case GateMethod::dr:
            if (!m0 || !ps) break;
            est = dr_estimate(sample, *space, *m0, *m1, *ps, cfg);
            break;
          case GateMethod::cf:
            est = cf_estimate(sample, *space, cfg);
            break;
          case GateMethod::or_reg:
            if (!m0) break;
            est = or_estimate(sample, *space, *m0, *m1, cfg);
            break;
          case GateMethod::ipw:
            if (!ps) break;
            est = ipw_estimate(sample, *space, *ps, cfg);
            break;
        }
        if (est) {
          est->diagnostics.theory_supported = theory;
          slots[m][q] = std::move(est);
        }
      } catch (const Error&) {
        // failed replicate: slot stays empty and is counted below
      }
    }
  });

  ScenarioReport report;
  report.spec = spec;
  report.theory_supported = theory;
  for (std::size_t m = 0; m < n_methods; ++m) {
    MethodResult row;
    row.method = spec.methods[m];
    std::vector<GateEstimate> ok;
    ok.reserve(static_cast<std::size_t>(q_total));
    for (auto& slot : slots[m]) {
      if (slot) ok.push_back(std::move(*slot));
    }
    row.failures = q_total - static_cast<int>(ok.size());
    row.stats = ase_stats(ok, truth0, truth1, *space);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string report_csv(const ScenarioReport& report) {
  const auto& s = report.spec;
  std::string head;
  head += to_string(s.space);
  head += ',';
  head += std::to_string(s.n);
  head += ',';
  head += std::to_string(s.replicates);
  head += ',';
  head += std::to_string(static_cast<unsigned long long>(s.seed));
  head += ',';
  format_double(head, s.noise);
  head += ',';
  head += s.or_correct ? "correct" : "misspecified";
  head += ',';
  head += s.ps_correct ? "correct" : "misspecified";

  std::string out =
      "scenario,n,replicates,seed,noise,outcome_model,propensity_model,"
      "method,ase,ase_sd,avg_dist,avg_dist_sd,failures,theory_supported\n";
  for (const auto& row : report.rows) {
    out += head;
    out += ',';
    out += to_string(row.method);
    out += ',';
    format_double(out, row.stats.ase);
    out += ',';
    format_double(out, row.stats.ase_sd);
    out += ',';
    format_double(out, row.stats.asd);
    out += ',';
    format_double(out, row.stats.asd_sd);
    out += ',';
    out += std::to_string(row.failures);
    out += ',';
    out += report.theory_supported ? "yes" : "no";
    out += '\n';
  }
  return out;
}

std::string report_text(const ScenarioReport& report) {
  const auto& s = report.spec;
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "scenario: %s (n=%lld, replicates=%d, seed=%llu, noise=%g)\n",
                to_string(s.space).c_str(), static_cast<long long>(s.n), s.replicates,
                static_cast<unsigned long long>(s.seed), s.noise);
  out += buf;
  std::snprintf(buf, sizeof(buf), "outcome model: %-12s  propensity model: %-12s\n",
                s.or_correct ? "correct" : "misspecified",
                s.ps_correct ? "correct" : "misspecified");
  out += buf;
  if (!report.theory_supported) {
    out += "note: both nuisance models misspecified; estimates lack theoretical support\n";
  }
  out += '\n';
  std::snprintf(buf, sizeof(buf), "%-8s%12s%12s%12s%12s%10s\n", "method", "ase", "ase_sd",
                "avg_dist", "avg_dist_sd", "failures");
  out += buf;
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-8s%12.6f%12.6f%12.6f%12.6f%10d\n",
                  to_string(row.method).c_str(), row.stats.ase, row.stats.ase_sd, row.stats.asd,
                  row.stats.asd_sd, row.failures);
    out += buf;
  }
  return out;
}

}  // namespace gci
