#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gci/frobenius_space.hpp"

using namespace gci;

namespace {

Mat sym3(double a01, double a02, double a12, double d0, double d1, double d2) {
  Mat a(3, 3);
  a << d0, a01, a02, a01, d1, a12, a02, a12, d2;
  return a;
}

// 3x3 Laplacian-constrained matrix determined by its off-diagonal entries.
Mat laplacian3(double a01, double a02, double a12) {
  return sym3(a01, a02, a12, -(a01 + a02), -(a01 + a12), -(a02 + a12));
}

}  // namespace

TEST_CASE("kind names roundtrip") {
  for (SymKind k : {SymKind::laplacian, SymKind::covariance, SymKind::diag_dominant_psd}) {
    CHECK(sym_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(sym_kind_from_string("toeplitz"), Error);
}

TEST_CASE("distance is the Frobenius norm of the difference") {
  FrobeniusSpace space(10, SymKind::diag_dominant_psd);
  // Constant-off-diagonal matrices with row-dominant diagonals: entries off=2
  // diag=18 versus off=3 diag=27 differ by 1 off the diagonal (90 slots) and
  // 9 on it (10 slots), giving sqrt(90 + 810) = 30.
  Mat a = Mat::Constant(10, 10, 2.0);
  Mat b = Mat::Constant(10, 10, 3.0);
  for (Index i = 0; i < 10; ++i) {
    a(i, i) = 18.0;
    b(i, i) = 27.0;
  }
  CHECK(space.contains(space.flatten(a)));
  CHECK(space.contains(space.flatten(b)));
  CHECK(space.distance(space.flatten(a), space.flatten(b)) ==
        doctest::Approx(30.0).epsilon(1e-14));

  Mat r = Mat::Random(10, 10);
  Mat s = Mat::Random(10, 10);
  CHECK(space.distance(space.flatten(r), space.flatten(s)) ==
        doctest::Approx((r - s).norm()).epsilon(1e-12));
}

TEST_CASE("flatten and unflatten invert each other") {
  FrobeniusSpace space(4, SymKind::covariance);
  Mat a = Mat::Random(4, 4);
  a = ((a + a.transpose()) / 2).eval();
  const Vec y = space.flatten(a);
  CHECK(y.size() == 16);
  CHECK((space.unflatten(y) - a).norm() == 0.0);
  CHECK_THROWS_AS(space.unflatten(Vec::Zero(15)), Error);
}

TEST_CASE("upper-triangle packing") {
  Mat a(3, 3);
  a << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  const Vec u = pack_upper(a);
  REQUIRE(u.size() == 6);
  CHECK(u[0] == 1);  // (0,0)
  CHECK(u[1] == 2);  // (0,1)
  CHECK(u[2] == 3);  // (0,2)
  CHECK(u[3] == 4);  // (1,1)
  CHECK(u[4] == 5);  // (1,2)
  CHECK(u[5] == 6);  // (2,2)
  CHECK((unpack_upper(u, 3) - a).norm() == 0.0);

  Mat big = Mat::Random(10, 10);
  big = ((big + big.transpose()) / 2).eval();
  CHECK(pack_upper(big).size() == 55);
  CHECK((unpack_upper(pack_upper(big), 10) - big).norm() == 0.0);
}

TEST_CASE("covariance projection clips negative eigenvalues") {
  FrobeniusSpace space(2, SymKind::covariance);
  Mat y(2, 2);
  y << 1.0, 0.0, 0.0, -1.0;
  const Mat p = space.unflatten(space.project(space.flatten(y)));
  CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(p(1, 1) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(std::abs(p(0, 1)) <= 1e-9);
}

TEST_CASE("covariance projection respects an active diagonal bound") {
  FrobeniusSpace space(2, SymKind::covariance, 1e6, 1.0);
  Mat y(2, 2);
  y << 3.0, 0.0, 0.0, 0.5;
  const Mat p = space.unflatten(space.project(space.flatten(y)));
  CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(p(1, 1) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(std::abs(p(0, 1)) <= 1e-8);
}

TEST_CASE("two-node closed-form projections") {
  SUBCASE("laplacian") {
    FrobeniusSpace space(2, SymKind::laplacian);
    Mat y(2, 2);
    y << 1.0, 0.5, 0.5, 2.0;
    // Feasible matrices are [[-t, t], [t, -t]] with off-diagonal t <= 0;
    // minimizing |A - Y|^2 over t gives t = -0.5.
    const Mat p = space.unflatten(space.project(space.flatten(y)));
    CHECK(p(0, 1) == doctest::Approx(-0.5).epsilon(1e-7));
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(p(1, 1) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(space.contains(space.flatten(p), 1e-7));
  }
  SUBCASE("diagonally dominant") {
    FrobeniusSpace space(2, SymKind::diag_dominant_psd);
    Mat y(2, 2);
    y << 0.5, 2.0, 2.0, 0.3;
    // KKT: both dominance constraints bind, t = (0.5 + 0.3 + 2*2*2)/8 = 1.2.
    const Mat p = space.unflatten(space.project(space.flatten(y)));
    CHECK(p(0, 1) == doctest::Approx(1.2).epsilon(1e-6));
    CHECK(p(0, 0) == doctest::Approx(1.2).epsilon(1e-6));
    CHECK(p(1, 1) == doctest::Approx(1.2).epsilon(1e-6));
    CHECK(space.contains(space.flatten(p), 1e-7));
  }
}

TEST_CASE("three-node laplacian projection against a grid-search oracle") {
  FrobeniusSpace space(3, SymKind::laplacian);
  const Mat y = sym3(-2.0, 0.5, -1.0, 1.0, 0.0, 2.0);

  // Row sums pin the diagonal, so the projection minimizes the Frobenius
  // objective over the three off-diagonal entries in (-inf, 0]; locate it by
  // a refining grid search.
  const auto objective = [&](double a01, double a02, double a12) {
    return (laplacian3(a01, a02, a12) - y).squaredNorm();
  };
  std::array<double, 3> center = {-1.0, -1.0, -1.0};
  double span = 3.0;
  for (int pass = 0; pass < 24; ++pass) {
    std::array<double, 3> best = center;
    double best_f = kInf;
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j)
        for (int k = 0; k <= 20; ++k) {
          const double a01 = std::min(0.0, center[0] - span + 2 * span * i / 20.0);
          const double a02 = std::min(0.0, center[1] - span + 2 * span * j / 20.0);
          const double a12 = std::min(0.0, center[2] - span + 2 * span * k / 20.0);
          const double f = objective(a01, a02, a12);
          if (f < best_f) {
            best_f = f;
            best = {a01, a02, a12};
          }
        }
    center = best;
    span *= 0.25;
  }
  const Mat oracle = laplacian3(center[0], center[1], center[2]);

  const Mat p = space.unflatten(space.project(space.flatten(y)));
  CHECK((p - oracle).norm() <= 1e-6);
  CHECK(space.contains(space.flatten(p), 1e-8));
  // And the solver's point is at least as good as the oracle's.
  CHECK((p - y).squaredNorm() <= (oracle - y).squaredNorm() + 1e-8);
}

TEST_CASE("projection is idempotent and non-expansive") {
  FrobeniusSpace space(3, SymKind::covariance);
  Rng rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    Mat a(3, 3), b(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j <= i; ++j) {
        a(i, j) = a(j, i) = rng.uniform(-2.0, 2.0);
        b(i, j) = b(j, i) = rng.uniform(-2.0, 2.0);
      }
    const Vec pa = space.project(space.flatten(a));
    const Vec pb = space.project(space.flatten(b));
    CHECK(space.contains(pa, 1e-8));
    CHECK((space.project(pa) - pa).norm() <= 1e-8);
    CHECK(space.distance(pa, pb) <=
          space.distance(space.flatten(a), space.flatten(b)) + 1e-8);
  }
}

TEST_CASE("feasible points are returned unchanged") {
  FrobeniusSpace space(3, SymKind::diag_dominant_psd);
  Mat a = sym3(1.0, 0.5, 2.0, 2.0, 3.5, 3.0);  // diag == off-diagonal row sums
  CHECK(space.contains(space.flatten(a)));
  CHECK((space.project(space.flatten(a)) - space.flatten(a)).norm() <= 1e-12);
}

TEST_CASE("membership checks each constraint family") {
  SUBCASE("laplacian") {
    FrobeniusSpace space(3, SymKind::laplacian, 2.0);
    CHECK(space.contains(space.flatten(laplacian3(-1.0, -0.5, 0.0))));
    CHECK_FALSE(space.contains(space.flatten(laplacian3(0.5, -0.5, -0.5))));   // positive off
    CHECK_FALSE(space.contains(space.flatten(laplacian3(-2.5, -0.5, -0.5)))); // below -W
    Mat bad = laplacian3(-1.0, -0.5, 0.0);
    bad(0, 0) += 0.1;  // row sum broken
    CHECK_FALSE(space.contains(space.flatten(bad)));
  }
  SUBCASE("covariance") {
    FrobeniusSpace space(2, SymKind::covariance, 1e6, 2.0);
    Mat ok(2, 2), indef(2, 2), big(2, 2);
    ok << 1.0, 0.5, 0.5, 1.0;
    indef << 1.0, 2.0, 2.0, 1.0;
    big << 3.0, 0.0, 0.0, 1.0;
    CHECK(space.contains(space.flatten(ok)));
    CHECK_FALSE(space.contains(space.flatten(indef)));
    CHECK_FALSE(space.contains(space.flatten(big)));
  }
  SUBCASE("asymmetric matrices are not members") {
    FrobeniusSpace space(2, SymKind::covariance);
    Vec y(4);
    y << 1.0, 0.5, 0.0, 1.0;  // column-major asymmetric
    CHECK_FALSE(space.contains(y));
    CHECK_THROWS_AS(space.project(y), Error);
  }
}

TEST_CASE("projection rejects non-finite input") {
  FrobeniusSpace space(2, SymKind::covariance);
  Vec y(4);
  y << 1.0, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(space.project(y), Error);
}

TEST_CASE("midpoints average the representations") {
  FrobeniusSpace space(3, SymKind::covariance);
  Mat a = Mat::Identity(3, 3);
  Mat b = 3.0 * Mat::Identity(3, 3);
  const Vec mid = space.geodesic_point(space.flatten(a), space.flatten(b), 0.5);
  CHECK((space.unflatten(mid) - 2.0 * Mat::Identity(3, 3)).norm() <= 1e-14);
}
