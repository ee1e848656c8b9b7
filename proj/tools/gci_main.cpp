#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gci/dataset_io.hpp"
#include "gci/estimators.hpp"
#include "gci/euclidean_space.hpp"
#include "gci/hulc.hpp"
#include "gci/simulation.hpp"
#include "gci/sphere_space.hpp"

namespace {

// Exit codes: 0 success, 2 configuration/usage, 3 failed replicates in a
// simulation, 4 data or estimation failure, 5 partition/internal failure.
int exit_code_for(gci::Errc c) {
  switch (c) {
    case gci::Errc::config_error:
    case gci::Errc::io_error:
    case gci::Errc::infeasible_level:
      return 2;
    case gci::Errc::partition_failure:
      return 5;
    default:
      return 4;
  }
}

std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw gci::Error(gci::Errc::io_error, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw gci::Error(gci::Errc::io_error, "write failure on '" + path + "'");
}

struct SimulateOpts {
  std::string space = "covariance";
  long long n = 100;
  int q = 100;
  std::string or_model = "correct";
  std::string ps_model = "correct";
  double noise = 0.1;
  double eta0 = 0.05;
  int folds = 5;
  std::string methods = "dr,cf,or,ipw";
  std::string out = "scenario";
  std::uint64_t seed = 0;
  int jobs = 0;
};

struct EstimateOpts {
  std::string data;
  std::string space_header;
  std::string method = "dr";
  double eta0 = 0.05;
  int folds = 5;
  std::string out = "estimate";
  std::uint64_t seed = 0;
  int jobs = 0;
};

struct HulcOpts {
  std::string data;
  std::string space_header;
  std::string method = "dr";
  double alpha = 0.05;
  double delta = 0.0;
  double eta0 = 0.05;
  int folds = 5;
  std::string out = "hulc";
  std::uint64_t seed = 0;
  int jobs = 0;
};

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Expands `--config FILE` into the equivalent flags: each `key=value` line
// becomes `--key value`, except keys already given explicitly (explicit flags
// win). Returns the argument list with the config option consumed.
std::vector<std::string> apply_config_files(std::vector<std::string> args) {
  std::vector<std::string> out;
  std::vector<std::pair<std::string, std::string>> pending;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        throw gci::Error(gci::Errc::config_error, "--config expects a file path");
      }
      file = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      out.push_back(args[i]);
      continue;
    }
    std::ifstream in(file);
    if (!in) throw gci::Error(gci::Errc::config_error, "cannot open config file '" + file + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string body = trimmed(line);
      if (body.empty() || body.front() == '#') continue;
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) {
        throw gci::Error(gci::Errc::config_error, file + ":" + std::to_string(lineno) +
                                                      ": expected key=value");
      }
      pending.emplace_back(trimmed(body.substr(0, eq)), trimmed(body.substr(eq + 1)));
    }
  }
  for (const auto& [key, value] : pending) {
    const std::string flag = "--" + key;
    bool given = false;
    for (const std::string& a : out) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (!given) {
      out.push_back(flag);
      out.push_back(value);
    }
  }
  return out;
}

std::vector<gci::GateMethod> parse_methods(const std::string& csv) {
  std::vector<gci::GateMethod> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t pos = csv.find(',', start);
    std::string tok = csv.substr(start, pos == std::string::npos ? pos : pos - start);
    if (!tok.empty()) out.push_back(gci::gate_method_from_string(tok));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw gci::Error(gci::Errc::config_error, "no estimator methods given");
  return out;
}

int run_simulate(const SimulateOpts& o) {
  gci::ScenarioSpec spec;
  spec.space = gci::scenario_space_from_string(o.space);
  spec.n = static_cast<gci::Index>(o.n);
  spec.replicates = o.q;
  spec.seed = o.seed;
  spec.or_correct = o.or_model == "correct";
  spec.ps_correct = o.ps_model == "correct";
  spec.noise = o.noise;
  spec.eta0 = o.eta0;
  spec.folds = o.folds;
  spec.methods = parse_methods(o.methods);
  spec.jobs = o.jobs;

  gci::ScenarioReport report = gci::run_scenario(spec);
  write_file(o.out + ".csv", gci::report_csv(report));
  write_file(o.out + ".txt", gci::report_text(report));

  int failures = 0;
  for (const auto& row : report.rows) failures += row.failures;
  std::cout << gci::report_text(report);
  return failures > 0 ? 3 : 0;
}

// field,index,value rows shared by the estimate and hulc reports.
class KvCsv {
 public:
  KvCsv() : body_("field,index,value\n") {}

  void add(const std::string& field, const std::string& value) {
    body_ += field + ",," + value + "\n";
  }
  void add(const std::string& field, double value) { add(field, fmt17(value)); }
  void add_indexed(const std::string& field, const gci::Vec& values) {
    for (gci::Index i = 0; i < values.size(); ++i) {
      body_ += field + "," + std::to_string(i + 1) + "," + fmt17(values[i]) + "\n";
    }
  }
  const std::string& str() const { return body_; }

 private:
  std::string body_;
};

void add_diagnostics(KvCsv& csv, const gci::GateDiagnostics& d) {
  csv.add("solver_iterations", std::to_string(d.solver_iterations));
  csv.add("propensity_iterations", std::to_string(d.propensity_iterations));
  for (int arm = 0; arm < 2; ++arm) {
    const gci::WeightSummary& w = arm == 0 ? d.kappa0 : d.kappa1;
    const std::string stem = "kappa" + std::to_string(arm) + "_";
    csv.add(stem + "min", w.min);
    csv.add(stem + "max", w.max);
    csv.add(stem + "mean", w.mean);
    csv.add(stem + "zeros", std::to_string(w.zeros));
  }
  if (d.folds > 0) {
    csv.add("folds", std::to_string(d.folds));
    csv.add("partition_retries", std::to_string(d.partition_retries));
  }
  csv.add("theory_supported", d.theory_supported ? "yes" : "no");
}

std::string joined_values(const gci::Vec& v) {
  std::string out;
  for (gci::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += fmt6(v[i]);
  }
  return out;
}

int run_estimate(const EstimateOpts& o) {
  gci::Dataset ds = gci::read_dataset(o.data, o.space_header);
  gci::GateMethod method = gci::gate_method_from_string(o.method);
  gci::EstimatorConfig cfg;
  cfg.eta0 = o.eta0;
  cfg.folds = o.folds;
  cfg.seed = o.seed;

  gci::GateEstimate est = [&] {
    try {
      return gci::estimate_gate(ds.sample, *ds.space, method, cfg);
    } catch (const gci::Error& e) {
      write_file(o.out + ".diag.txt", std::string("estimation failed: ") + e.what() + "\n");
      throw;
    }
  }();

  KvCsv csv;
  csv.add("method", gci::to_string(est.method));
  csv.add("space", ds.space->name());
  csv.add("n", std::to_string(ds.sample.n()));
  csv.add("contrast", est.contrast);
  csv.add_indexed("theta0", gci::encode_point(*ds.space, est.theta0));
  csv.add_indexed("theta1", gci::encode_point(*ds.space, est.theta1));
  add_diagnostics(csv, est.diagnostics);
  write_file(o.out + ".csv", csv.str());

  std::string txt;
  txt += "method:    " + gci::to_string(est.method) + "\n";
  txt += "space:     " + ds.space->name() + "  (n=" + std::to_string(ds.sample.n()) + ")\n";
  txt += "contrast:  " + fmt6(est.contrast) + "\n";
  txt += "theta0:    " + joined_values(gci::encode_point(*ds.space, est.theta0)) + "\n";
  txt += "theta1:    " + joined_values(gci::encode_point(*ds.space, est.theta1)) + "\n";
  txt += "kappa0:    min " + fmt6(est.diagnostics.kappa0.min) + ", max " +
         fmt6(est.diagnostics.kappa0.max) + ", mean " + fmt6(est.diagnostics.kappa0.mean) +
         ", zeros " + std::to_string(est.diagnostics.kappa0.zeros) + "\n";
  txt += "kappa1:    min " + fmt6(est.diagnostics.kappa1.min) + ", max " +
         fmt6(est.diagnostics.kappa1.max) + ", mean " + fmt6(est.diagnostics.kappa1.mean) +
         ", zeros " + std::to_string(est.diagnostics.kappa1.zeros) + "\n";
  write_file(o.out + ".txt", txt);
  std::cout << txt;
  return 0;
}

int run_hulc(const HulcOpts& o) {
  gci::Dataset ds = gci::read_dataset(o.data, o.space_header);
  gci::HulcConfig cfg;
  cfg.alpha = o.alpha;
  cfg.delta = o.delta;
  cfg.seed = o.seed;
  cfg.method = gci::gate_method_from_string(o.method);
  cfg.estimator.eta0 = o.eta0;
  cfg.estimator.folds = o.folds;

  gci::HulcInterval iv = [&] {
    try {
      return gci::hulc_interval(ds.sample, *ds.space, cfg);
    } catch (const gci::Error& e) {
      write_file(o.out + ".diag.txt", std::string("interval failed: ") + e.what() + "\n");
      throw;
    }
  }();

  KvCsv csv;
  csv.add("method", gci::to_string(cfg.method));
  csv.add("alpha", cfg.alpha);
  csv.add("delta", cfg.delta);
  csv.add("b", std::to_string(iv.breaks.b));
  csv.add("tau", iv.breaks.tau);
  csv.add("b_star", std::to_string(iv.b_star));
  csv.add("lo", iv.lo);
  csv.add("hi", iv.hi);
  gci::Vec contrasts =
      Eigen::Map<const gci::Vec>(iv.split_contrasts.data(),
                                 static_cast<gci::Index>(iv.split_contrasts.size()));
  csv.add_indexed("split_contrast", contrasts);
  write_file(o.out + ".csv", csv.str());

  std::string txt;
  txt += "method:     " + gci::to_string(cfg.method) + "\n";
  txt += "level:      alpha=" + fmt6(cfg.alpha) + ", delta=" + fmt6(cfg.delta) + "\n";
  txt += "splits:     B=" + std::to_string(iv.breaks.b) + ", tau=" + fmt6(iv.breaks.tau) +
         ", B*=" + std::to_string(iv.b_star) + "\n";
  txt += "interval:   [" + fmt6(iv.lo) + ", " + fmt6(iv.hi) + "]\n";
  txt += "contrasts:  " + joined_values(contrasts) + "\n";
  write_file(o.out + ".txt", txt);
  std::cout << txt;
  return 0;
}

int run_selftest() {
  int failed = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failed;
  };

  {
    gci::EuclideanSpace interval(0.0, 10.0);
    gci::Vec a(1), b(1);
    a << 2.0;
    b << 4.0;
    gci::Vec y = gci::geodesic_eval(interval, a, b, 2.0);
    check("bounded extension damps toward the boundary", std::abs(y[0] - 5.5) < 1e-8);
  }
  {
    gci::HulcBreaks br = gci::hulc_breaks(0.05, 0.0);
    check("split-count solution at the 5% level", br.b == 6 && std::abs(br.tau - 0.6) < 1e-12);
  }
  {
    gci::SphereSpace sphere(3);
    gci::Vec a(3), b(3);
    a << 1, 0, 0;
    b << 0, 1, 0;
    gci::Vec mid = gci::geodesic_eval(sphere, a, b, 0.5);
    const double r = std::sqrt(0.5);
    check("sphere midpoint", (mid - (gci::Vec(3) << r, r, 0).finished()).norm() < 1e-12);
  }
  {
    gci::Rng r1(gci::mix_seed(7, 3)), r2(gci::mix_seed(7, 3));
    gci::Sample s1 = gci::gen_covariance(30, r1);
    gci::Sample s2 = gci::gen_covariance(30, r2);
    bool same = (s1.x - s2.x).cwiseAbs().maxCoeff() == 0.0 && s1.t == s2.t;
    for (std::size_t i = 0; i < s1.y.size() && same; ++i) same = s1.y[i] == s2.y[i];
    check("seeded generators repeat byte for byte", same);
  }
  {
    // Doubly robust wiring against the closed-form augmented IPW estimate.
    gci::EuclideanSpace line(1);
    gci::Rng rng(11);
    const gci::Index n = 60;
    gci::Sample s;
    s.x.resize(n, 1);
    for (gci::Index i = 0; i < n; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const int t = rng.bernoulli(gci::expit(x));
      s.x(i, 0) = x;
      s.t.push_back(t);
      s.y.push_back((gci::Vec(1) << t + x + 0.2 * rng.uniform(-1.0, 1.0)).finished());
    }
    gci::GateEstimate est = gci::estimate_gate(s, line, gci::GateMethod::dr, {});
    gci::GfrModel m0 = gci::gfr_fit(line, s.x, s.t, s.y, 0);
    gci::GfrModel m1 = gci::gfr_fit(line, s.x, s.t, s.y, 1);
    gci::PropensityFit ps = gci::fit_logistic(s.x, s.t);
    gci::Vec ehat = gci::predict_propensity_batch(ps, s.x);
    double th0 = 0.0, th1 = 0.0;
    std::vector<gci::Vec> p0 = m0.predict_training(), p1 = m1.predict_training();
    for (gci::Index i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const double y = s.y[u][0];
      th1 += p1[u][0] + (s.t[u] == 1 ? (y - p1[u][0]) / ehat[i] : 0.0);
      th0 += p0[u][0] + (s.t[u] == 0 ? (y - p0[u][0]) / (1.0 - ehat[i]) : 0.0);
    }
    th0 /= static_cast<double>(n);
    th1 /= static_cast<double>(n);
    check("doubly robust estimate matches the closed form",
          std::abs(est.contrast - std::abs(th1 - th0)) < 1e-8);
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodesic causal inference: estimation, intervals and simulation"};
  app.require_subcommand(1);
  std::string config_file;

  SimulateOpts sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run a Monte-Carlo scenario");
  sim_cmd->add_option("--space", sim.space, "scenario space: covariance or compositional")
      ->check(CLI::IsMember({"covariance", "compositional"}));
  sim_cmd->add_option("--n", sim.n, "sample size per replicate");
  sim_cmd->add_option("--q", sim.q, "number of replicates");
  sim_cmd->add_option("--or", sim.or_model, "outcome model: correct or misspecified")
      ->check(CLI::IsMember({"correct", "misspecified"}));
  sim_cmd->add_option("--ps", sim.ps_model, "propensity model: correct or misspecified")
      ->check(CLI::IsMember({"correct", "misspecified"}));
  sim_cmd->add_option("--noise", sim.noise, "noise amplitude of the designs");
  sim_cmd->add_option("--eta0", sim.eta0, "propensity clipping level");
  sim_cmd->add_option("--folds", sim.folds, "cross-fitting folds");
  sim_cmd->add_option("--methods", sim.methods, "comma list from dr,cf,or,ipw");
  sim_cmd->add_option("--out", sim.out, "output file prefix");
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--jobs", sim.jobs, "worker threads (0 = all cores)");
  sim_cmd->add_option("--config", config_file, "key=value file holding these flags' names as keys");

  EstimateOpts est;
  CLI::App* est_cmd = app.add_subcommand("estimate", "estimate the treatment effect on a dataset");
  est_cmd->add_option("--data", est.data, "input CSV dataset")->required();
  est_cmd->add_option("--space-header", est.space_header,
                      "override the dataset's '#space=' metadata line");
  est_cmd->add_option("--method", est.method, "estimator: dr, cf, or, ipw")
      ->check(CLI::IsMember({"dr", "cf", "or", "ipw"}));
  est_cmd->add_option("--eta0", est.eta0, "propensity clipping level");
  est_cmd->add_option("--folds", est.folds, "cross-fitting folds");
  est_cmd->add_option("--out", est.out, "output file prefix");
  est_cmd->add_option("--seed", est.seed, "random seed");
  est_cmd->add_option("--jobs", est.jobs, "worker threads (0 = all cores)");
  est_cmd->add_option("--config", config_file, "key=value file holding these flags' names as keys");

  HulcOpts hul;
  CLI::App* hulc_cmd = app.add_subcommand("hulc", "convex-hull confidence interval for the effect size");
  hulc_cmd->add_option("--data", hul.data, "input CSV dataset")->required();
  hulc_cmd->add_option("--space-header", hul.space_header,
                       "override the dataset's '#space=' metadata line");
  hulc_cmd->add_option("--alpha", hul.alpha, "miscoverage level");
  hulc_cmd->add_option("--delta", hul.delta, "median bias bound");
  hulc_cmd->add_option("--method", hul.method, "estimator: dr, cf, or, ipw")
      ->check(CLI::IsMember({"dr", "cf", "or", "ipw"}));
  hulc_cmd->add_option("--eta0", hul.eta0, "propensity clipping level");
  hulc_cmd->add_option("--folds", hul.folds, "cross-fitting folds");
  hulc_cmd->add_option("--out", hul.out, "output file prefix");
  hulc_cmd->add_option("--seed", hul.seed, "random seed");
  hulc_cmd->add_option("--jobs", hul.jobs, "worker threads (0 = all cores)");
  hulc_cmd->add_option("--config", config_file, "key=value file holding these flags' names as keys");

  CLI::App* self_cmd = app.add_subcommand("selftest", "run built-in sanity checks");

  std::vector<std::string> args;
  try {
    args = apply_config_files(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const gci::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the error message
    return code == 0 ? 0 : 2;
  }

  if (const char* env = std::getenv("GCI_SEED")) {
    std::uint64_t seed = 0;
    const std::string s(env);
    auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
      std::cerr << "error: GCI_SEED must be an unsigned integer\n";
      return 2;
    }
    sim.seed = est.seed = hul.seed = seed;
  }

  try {
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (est_cmd->parsed()) return run_estimate(est);
    if (hulc_cmd->parsed()) return run_hulc(hul);
    if (self_cmd->parsed()) return run_selftest();
  } catch (const gci::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 5;
  }
  return 2;
}
