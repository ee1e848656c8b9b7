#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "gci/common.hpp"

using namespace gci;

TEST_CASE("identical seeds give identical streams") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 200; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(12345), d(12345);
  for (int i = 0; i < 200; ++i) {
    CHECK(c.uniform() == d.uniform());
    CHECK(c.normal() == d.normal());
  }
}

TEST_CASE("different seeds give different streams") {
  Rng a(1), b(2);
  int agree = 0;
  for (int i = 0; i < 64; ++i) {
    agree += a.next_u64() == b.next_u64();
  }
  CHECK(agree < 4);
}

TEST_CASE("mix_seed separates derived streams") {
  const std::uint64_t base = 42;
  std::vector<std::uint64_t> derived;
  for (std::uint64_t q = 0; q < 64; ++q) derived.push_back(mix_seed(base, q));
  std::sort(derived.begin(), derived.end());
  CHECK(std::adjacent_find(derived.begin(), derived.end()) == derived.end());
  CHECK(mix_seed(base, 7) == mix_seed(base, 7));
  CHECK(mix_seed(base, 7) != mix_seed(base + 1, 7));
}

TEST_CASE("uniform lands in [0, 1)") {
  Rng rng(99);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform(a, b) respects its range and rough mean") {
  Rng rng(7);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(-3.0, 5.0);
    CHECK(u >= -3.0);
    CHECK(u < 5.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 1.0) < 0.1);
}

TEST_CASE("below is in range, below(1) is 0, below(0) throws") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.below(13) < 13);
    CHECK(rng.below(1) == 0);
  }
  CHECK_THROWS_AS(rng.below(0), Error);
}

TEST_CASE("bernoulli boundary probabilities") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    CHECK(rng.bernoulli(0.0) == 0);
    CHECK(rng.bernoulli(1.0) == 1);
  }
}

TEST_CASE("normal draws match the first two moments") {
  Rng rng(2024);
  const int n = 50000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("permutation is a permutation and is seed-deterministic") {
  Rng a(5), b(5);
  std::vector<Index> pa = a.permutation(100);
  std::vector<Index> pb = b.permutation(100);
  CHECK(pa == pb);

  std::vector<Index> sorted = pa;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Index> iota(100);
  std::iota(iota.begin(), iota.end(), Index{0});
  CHECK(sorted == iota);

  // A fresh draw from the same generator differs (overwhelmingly likely).
  std::vector<Index> pc = a.permutation(100);
  CHECK(pa != pc);
}

TEST_CASE("expit is a stable logistic") {
  CHECK(expit(0.0) == doctest::Approx(0.5));
  CHECK(expit(700.0) == doctest::Approx(1.0));
  CHECK(expit(-700.0) == doctest::Approx(0.0));
  CHECK(expit(0.75) == doctest::Approx(1.0 / (1.0 + std::exp(-0.75))).epsilon(1e-15));
}

TEST_CASE("normal_quantile inverts the championship points") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  // Symmetry over a sweep.
  for (double p : {0.01, 0.1, 0.3, 0.45}) {
    CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), Error);
  CHECK_THROWS_AS(normal_quantile(1.0), Error);
}

TEST_CASE("parallel_for covers every index exactly once regardless of jobs") {
  for (int jobs : {1, 2, 5}) {
    std::vector<int> hits(503, 0);
    parallel_for(503, jobs, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("parallel_for rethrows a worker exception") {
  CHECK_THROWS_AS(
      parallel_for(16, 4,
                   [](int i) {
                     if (i == 9) throw Error(Errc::invalid_argument, "boom");
                   }),
      Error);
}
