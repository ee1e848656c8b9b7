#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "gci/euclidean_space.hpp"
#include "gci/frechet.hpp"
#include "gci/simulation.hpp"
#include "gci/sphere_space.hpp"

using namespace gci;

namespace {

Mat unflatten10(const Vec& v) { return Eigen::Map<const Mat>(v.data(), 10, 10); }

GateEstimate make_estimate(const MetricSpace& space, const Vec& th0, const Vec& th1) {
  return GateEstimate{th0, th1, GeodesicSegment(space, th0, th1),
                      space.distance(th0, th1), GateMethod::dr, {}};
}

}  // namespace

TEST_CASE("scenario space names round-trip") {
  CHECK(to_string(ScenarioSpace::covariance) == "covariance");
  CHECK(to_string(ScenarioSpace::compositional) == "compositional");
  CHECK(scenario_space_from_string("covariance") == ScenarioSpace::covariance);
  CHECK(scenario_space_from_string("compositional") == ScenarioSpace::compositional);
  CHECK_THROWS_WITH_AS(scenario_space_from_string("network"),
                       doctest::Contains("unknown scenario space"), Error);
}

TEST_CASE("covariance means and effect targets match the design constants") {
  const Mat m0 = unflatten10(covariance_mean_matrix(0, 0.0));
  const Mat m1 = unflatten10(covariance_mean_matrix(1, 0.0));
  for (Index j = 0; j < 10; ++j) {
    for (Index k = 0; k < 10; ++k) {
      CHECK(m0(j, k) == (j == k ? 18.0 : 2.0));
      CHECK(m1(j, k) == (j == k ? 27.0 : 3.0));
    }
  }

  const auto [t0, t1] = covariance_truth();
  CHECK((t0 - covariance_mean_matrix(0, 0.0)).norm() == 0.0);
  CHECK((t1 - covariance_mean_matrix(1, 0.0)).norm() == 0.0);

  // 90 off-diagonal entries differ by 1 and 10 diagonal entries by 9:
  // the Frobenius gap is sqrt(90 + 810) = 30.
  auto space = make_scenario_space(ScenarioSpace::covariance);
  CHECK(space->distance(t0, t1) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(space->contains(t0));
  CHECK(space->contains(t1));
}

TEST_CASE("noiseless covariance draws equal the conditional mean") {
  Rng rng(314);
  const Sample s = gen_covariance(40, rng, 0.0);
  for (Index i = 0; i < 40; ++i) {
    const Vec mean = covariance_mean_matrix(s.t[static_cast<std::size_t>(i)], s.x(i, 0));
    CHECK((s.y[static_cast<std::size_t>(i)] - mean).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("covariance draws are symmetric, diagonally dominant, and feasible") {
  Rng rng(3141);
  const double noise = 0.1;
  const Sample s = gen_covariance(50, rng, noise);
  auto space = make_scenario_space(ScenarioSpace::covariance);
  for (Index i = 0; i < 50; ++i) {
    const Mat a = unflatten10(s.y[static_cast<std::size_t>(i)]);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);

    const double base = s.t[static_cast<std::size_t>(i)] + s.x(i, 0) + 2.0;
    for (Index j = 0; j < 10; ++j) {
      double off = 0.0;
      for (Index k = 0; k < 10; ++k) {
        if (k == j) continue;
        off += a(j, k);
        // Every off-diagonal entry is the level constant plus bounded noise.
        CHECK(std::abs(a(j, k) - base) <= noise + 1e-12);
      }
      CHECK(a(j, j) == doctest::Approx(off).epsilon(1e-12));
    }

    CHECK(space->contains(s.y[static_cast<std::size_t>(i)]));
    Eigen::SelfAdjointEigenSolver<Mat> eig(a);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("off-diagonal level constant of the treated arm is three") {
  // The design's potential-outcome mean has every off-diagonal entry equal to
  // t + 2 once the covariate is removed; the empirical average over the
  // treated arm pins the constant. (The raw conditional mean would not do:
  // treatment selects units with larger covariates.)
  Rng rng(271828);
  const Index n = 50000;
  const Sample s = gen_covariance(n, rng, 0.1);
  double sum = 0.0;
  long count = 0;
  Index treated = 0;
  for (Index i = 0; i < n; ++i) {
    if (s.t[static_cast<std::size_t>(i)] != 1) continue;
    ++treated;
    const Mat a = unflatten10(s.y[static_cast<std::size_t>(i)]);
    sum += (a.sum() - a.trace()) - 90.0 * s.x(i, 0);
    count += 90;
  }
  CHECK(treated > n / 3);  // both arms well populated
  CHECK(sum / static_cast<double>(count) == doctest::Approx(3.0).epsilon(0.01 / 3.0));
}

TEST_CASE("compositional means are unit vectors with mirrored arms") {
  for (double x : {-1.0, -0.3, 0.0, 0.4, 1.0}) {
    const Vec m0 = compositional_mean(0, x);
    const Vec m1 = compositional_mean(1, x);
    CHECK(m0.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m1.norm() == doctest::Approx(1.0).epsilon(1e-14));
    // The treated curve swaps the two sine components.
    CHECK(m1[0] == m0[0]);
    CHECK(m1[1] == m0[2]);
    CHECK(m1[2] == m0[1]);
    CHECK(m0.minCoeff() >= 0.0);
  }

  const auto [t0, t1] = compositional_truth();
  const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
  CHECK(t0[0] == doctest::Approx(s2 / 2.0).epsilon(1e-15));
  CHECK(t0[1] == doctest::Approx(s2 / 4.0).epsilon(1e-15));
  CHECK(t0[2] == doctest::Approx(s6 / 4.0).epsilon(1e-15));
  CHECK(t1[0] == doctest::Approx(s2 / 2.0).epsilon(1e-15));
  CHECK(t1[1] == doctest::Approx(s6 / 4.0).epsilon(1e-15));
  CHECK(t1[2] == doctest::Approx(s2 / 4.0).epsilon(1e-15));

  SphereSpace sphere(3);
  const double expected = std::acos(0.5 + std::sqrt(3.0) / 4.0);
  CHECK(sphere.distance(t0, t1) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("noiseless compositional draws sit exactly on the mean curve") {
  Rng rng(99);
  const Sample s = gen_compositional(40, rng, 0.0);
  for (Index i = 0; i < 40; ++i) {
    const Vec mean = compositional_mean(s.t[static_cast<std::size_t>(i)], s.x(i, 0));
    CHECK((s.y[static_cast<std::size_t>(i)] - mean).norm() <= 1e-12);
  }
}

TEST_CASE("compositional noise stays within the tangent budget") {
  Rng rng(7);
  const double noise = 0.1;
  const Sample s = gen_compositional(200, rng, noise);
  SphereSpace sphere(3);
  for (Index i = 0; i < 200; ++i) {
    const Vec& y = s.y[static_cast<std::size_t>(i)];
    CHECK(y.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sphere.contains(y, 1e-9));
    const Vec mean = compositional_mean(s.t[static_cast<std::size_t>(i)], s.x(i, 0));
    // The tangent displacement has coordinates in [-noise, noise]^2 and the
    // exponential map preserves its length as arc length.
    CHECK(sphere.distance(y, mean) <= noise * std::sqrt(2.0) + 1e-12);
  }
}

TEST_CASE("marginal mean of the control curve hits the stated target") {
  // The control mean curve is a great-circle arc traversed symmetrically as
  // the covariate sweeps its range, so the population barycenter sits at the
  // curve's middle — the stated effect target. A symmetric covariate grid
  // reproduces it to well within the Monte-Carlo tolerance.
  SphereSpace sphere(3);
  const Index n = 20000;
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    pts.push_back(compositional_mean(0, x));
  }
  const Vec mean = weighted_frechet_mean(sphere, {pts, Vec::Ones(n)});
  CHECK(sphere.distance(mean, compositional_truth().first) <= 0.01);
}

TEST_CASE("regression at the center recovers the treated mean curve") {
  Rng rng(555);
  const Sample s = gen_compositional(2000, rng, 0.1);
  SphereSpace sphere(3);
  GfrModel model = gfr_fit(sphere, s.x, s.t, s.y, 1);
  const Vec pred = model.predict(Vec::Zero(1));
  CHECK(sphere.distance(pred, compositional_mean(1, 0.0)) <= 0.05);
}

TEST_CASE("error statistics match hand-computed values") {
  EuclideanSpace line(1);
  const Vec truth0 = Vec::Zero(1), truth1 = Vec::Zero(1);

  // All estimates equal to the truth score zero.
  std::vector<GateEstimate> exact = {make_estimate(line, truth0, truth1)};
  AseStats st = ase_stats(exact, truth0, truth1, line);
  CHECK(st.ase == 0.0);
  CHECK(st.asd == 0.0);

  // One replicate at distances one and two: 1^2 + 2^2 = 5, 1 + 2 = 3.
  std::vector<GateEstimate> single = {
      make_estimate(line, Vec::Constant(1, 1.0), Vec::Constant(1, 2.0))};
  st = ase_stats(single, truth0, truth1, line);
  CHECK(st.ase == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(st.asd == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(st.ase_sd == 0.0);
  CHECK(st.asd_sd == 0.0);
  CHECK(ase(single, truth0, truth1, line) == doctest::Approx(5.0).epsilon(1e-14));

  // Two replicates: squared sums {5, 13} average to 9 with sd sqrt(32).
  std::vector<GateEstimate> pair = {
      make_estimate(line, Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)),
      make_estimate(line, Vec::Constant(1, 2.0), Vec::Constant(1, 3.0))};
  st = ase_stats(pair, truth0, truth1, line);
  CHECK(st.ase == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(st.ase_sd == doctest::Approx(std::sqrt(32.0)).epsilon(1e-14));
  CHECK(st.asd == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(st.asd_sd == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  // Empty estimate lists reduce to all-zero statistics.
  st = ase_stats({}, truth0, truth1, line);
  CHECK(st.ase == 0.0);
  CHECK(st.asd == 0.0);

  // Mismatched or infeasible truths are rejected up front.
  CHECK_THROWS_AS(ase_stats(single, Vec::Zero(2), truth1, line), Error);
  EuclideanSpace segment(0.0, 1.0);
  std::vector<GateEstimate> ok = {
      make_estimate(segment, Vec::Constant(1, 0.2), Vec::Constant(1, 0.8))};
  try {
    ase_stats(ok, Vec::Constant(1, -5.0), Vec::Constant(1, 0.5), segment);
    FAIL("expected infeasible truth to throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::infeasible_point);
  }
}

TEST_CASE("generators are deterministic in the seed") {
  Rng a(2024), b(2024), c(2025);
  const Sample s1 = gen_covariance(25, a, 0.1);
  const Sample s2 = gen_covariance(25, b, 0.1);
  const Sample s3 = gen_covariance(25, c, 0.1);
  CHECK((s1.x - s2.x).norm() == 0.0);
  CHECK(s1.t == s2.t);
  for (std::size_t i = 0; i < 25; ++i) CHECK((s1.y[i] - s2.y[i]).norm() == 0.0);
  CHECK((s1.x - s3.x).norm() > 0.0);

  Rng d(11), e(11);
  const Sample u1 = gen_compositional(25, d, 0.1);
  const Sample u2 = gen_compositional(25, e, 0.1);
  CHECK((u1.x - u2.x).norm() == 0.0);
  for (std::size_t i = 0; i < 25; ++i) CHECK((u1.y[i] - u2.y[i]).norm() == 0.0);
}

TEST_CASE("scenario reports are deterministic and job-count independent") {
  ScenarioSpec spec;
  spec.space = ScenarioSpace::covariance;
  spec.n = 40;
  spec.replicates = 3;
  spec.seed = 7;
  spec.jobs = 1;

  const ScenarioReport r1 = run_scenario(spec);
  const ScenarioReport r2 = run_scenario(spec);
  spec.jobs = 3;
  const ScenarioReport r3 = run_scenario(spec);

  CHECK(report_csv(r1) == report_csv(r2));
  CHECK(report_csv(r1) == report_csv(r3));
  CHECK(report_text(r1) == report_text(r3));

  REQUIRE(r1.rows.size() == 4);
  for (const auto& row : r1.rows) {
    CHECK(row.failures == 0);
    CHECK(std::isfinite(row.stats.ase));
    CHECK(row.stats.ase >= 0.0);
    CHECK(row.stats.asd >= 0.0);
  }
}

TEST_CASE("single-replicate scenario produces a deterministic report") {
  ScenarioSpec spec;
  spec.space = ScenarioSpace::compositional;
  spec.n = 25;
  spec.replicates = 1;
  spec.seed = 42;
  spec.methods = {GateMethod::or_reg};
  spec.jobs = 1;

  const std::string csv1 = report_csv(run_scenario(spec));
  const std::string csv2 = report_csv(run_scenario(spec));
  CHECK(csv1 == csv2);
  CHECK(csv1.find("compositional,25,1,42,") != std::string::npos);
}

TEST_CASE("report formats carry the scenario configuration") {
  ScenarioSpec spec;
  spec.space = ScenarioSpace::covariance;
  spec.n = 30;
  spec.replicates = 2;
  spec.seed = 5;
  spec.or_correct = false;
  spec.ps_correct = false;
  spec.methods = {GateMethod::ipw};
  spec.jobs = 1;

  const ScenarioReport report = run_scenario(spec);
  const std::string csv = report_csv(report);
  const std::string header =
      "scenario,n,replicates,seed,noise,outcome_model,propensity_model,"
      "method,ase,ase_sd,avg_dist,avg_dist_sd,failures,theory_supported";
  CHECK(csv.substr(0, header.size()) == header);
  CHECK(csv.find("covariance,30,2,5,0.1,misspecified,misspecified,ipw,") != std::string::npos);
  CHECK(csv.find(",no\n") != std::string::npos);
  CHECK_FALSE(report.theory_supported);

  const std::string text = report_text(report);
  CHECK(text.find("both nuisance models misspecified") != std::string::npos);

  // With at least one correct nuisance the flag stays supportive.
  spec.or_correct = true;
  const ScenarioReport ok = run_scenario(spec);
  CHECK(ok.theory_supported);
  CHECK(report_csv(ok).find(",yes\n") != std::string::npos);
}

TEST_CASE("scenario validation rejects bad configurations") {
  const auto expect_config_error = [](ScenarioSpec spec) {
    try {
      run_scenario(spec);
      FAIL("expected configuration error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::config_error);
    }
  };

  ScenarioSpec spec;
  spec.n = 19;
  expect_config_error(spec);

  spec = ScenarioSpec{};
  spec.replicates = 0;
  expect_config_error(spec);

  spec = ScenarioSpec{};
  spec.noise = -0.1;
  expect_config_error(spec);

  spec = ScenarioSpec{};
  spec.eta0 = 0.6;
  expect_config_error(spec);

  spec = ScenarioSpec{};
  spec.folds = 1;
  expect_config_error(spec);

  spec = ScenarioSpec{};
  spec.methods.clear();
  expect_config_error(spec);
}
