#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <blpp/distlib.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "test_util.hpp"

using namespace blpp;

TEST_CASE("normal_cdf hits reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
  CHECK(normal_cdf(8.0) + normal_cdf(-8.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(normal_cdf(-40.0) >= 0.0);
  CHECK(normal_cdf(40.0) <= 1.0);
}

TEST_CASE("log_half_erfc agrees with direct evaluation and stays finite") {
  for (double u : {-2.0, -0.5, 0.0, 0.7, 3.0, 7.0}) {
    CHECK(log_half_erfc(u) ==
          doctest::Approx(std::log(0.5 * std::erfc(u))).epsilon(1e-12));
  }
  // Far past erfc underflow the asymptotic branch must carry on smoothly:
  // log(erfc(u)/2) ~ -u^2 - log(2 sqrt(pi) u).
  for (double u : {30.0, 100.0}) {
    const double v = log_half_erfc(u);
    CHECK(std::isfinite(v));
    const double asym = -u * u - std::log(2.0 * std::sqrt(M_PI) * u);
    CHECK(v == doctest::Approx(asym).epsilon(1e-3));
  }
}

TEST_CASE("exp_sup_cdf: exponential closed form") {
  CHECK(exp_sup_cdf(1.0, 0.0) == 0.0);
  CHECK(exp_sup_cdf(1.0, -3.0) == 0.0);
  CHECK(exp_sup_cdf(1.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(exp_sup_cdf(2.0, 1.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(exp_sup_cdf(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(exp_sup_cdf(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("increment_cdf_D: shape, limits, and domain guards") {
  for (double l : {0.5, 1.0, 2.0}) {
    for (double t : {0.5, 1.0, 4.0}) {
      double prev = 0.0;
      const double zmax = l * t + 20.0 * std::sqrt(t);
      for (int k = 0; k <= 400; ++k) {
        const double z = zmax * k / 400.0;
        const double v = increment_cdf_D(l, t, z);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v >= prev - 1e-12);
        prev = v;
      }
      CHECK(increment_cdf_D(l, t, zmax) > 1.0 - 1e-6);
    }
  }
  CHECK_THROWS_AS(increment_cdf_D(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(increment_cdf_D(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(increment_cdf_D(1.0, 1.0, -0.5), std::invalid_argument);
}

TEST_CASE("argmax_tail: exact endpoints and monotonicity") {
  CHECK(argmax_tail(1.0, 0.0) == 1.0);  // formula at 0, exactly
  CHECK(argmax_tail(0.5, 0.0) == 1.0);
  CHECK(argmax_tail(1.0, 100.0) < 1e-6);
  for (double l : {0.5, 1.0, 2.0}) {
    double prev = argmax_tail(l, 0.0);
    for (int k = 1; k <= 300; ++k) {
      const double t = 0.05 * k;
      const double tail = argmax_tail(l, t);
      CHECK(tail <= prev + 1e-15);
      prev = tail;
    }
  }
  for (double t : {0.25, 1.0, 4.0}) {
    CHECK(argmax_tail(2.0, t) <= argmax_tail(1.0, t));
    CHECK(argmax_tail(1.0, t) <= argmax_tail(0.5, t));
  }
}

TEST_CASE("tail-at-zero consistency with the increment law") {
  double worst = 0.0;
  for (double l : {0.5, 1.0, 2.0}) {
    for (int k = 1; k <= 400; ++k) {
      const double t = 0.01 * k;
      worst = std::max(worst, std::abs(increment_cdf_D(l, t, 0.0) - argmax_tail(l, t)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("ks_distance: guards, constant samples, null calibration") {
  const auto unit = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
  CHECK_THROWS_AS(ks_distance(std::vector<double>(5, 0.5), unit), std::invalid_argument);

  // All samples at one point of a continuous law: KS = max(F(c), 1 - F(c)).
  const std::vector<double> flat(200, 0.3);
  CHECK(ks_distance(flat, unit) == doctest::Approx(0.7).epsilon(1e-12));

  // Samples from the hypothesized law: the classical 99% bound holds at
  // almost all seeds.
  int ok = 0;
  const int trials = 200, n = 500;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(StreamKey::root(777).child_signed(trial));
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.uniform01();
    if (ks_distance(xs, unit) < 1.63 / std::sqrt(static_cast<double>(n))) ++ok;
  }
  CHECK(ok >= 191);  // 99% nominal, binomial slack at 200 trials
}

TEST_CASE("ks_check report wiring") {
  Rng rng(StreamKey::root(5));
  std::vector<double> xs(300);
  for (auto& x : xs) x = rng.uniform01();
  const auto unit = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
  const TestReport r = ks_check("unit-ks", xs, unit, 0.2, 7);
  CHECK(r.name == "unit-ks");
  CHECK(r.pass == (r.value <= r.threshold));
  CHECK(r.n_used == 300);
  CHECK(r.n_excluded == 7);
}

TEST_CASE("atom-aware KS credits the true jump instead of charging it") {
  // Mixture: P(X = 0) = 0.4, else Exp(1). Continuous-KS against the mixed CDF
  // sees the whole atom as error; the two-sided variant must not.
  const double p0 = 0.4;
  const auto cdf = [p0](double x) {
    return x < 0.0 ? 0.0 : p0 + (1.0 - p0) * (1.0 - std::exp(-x));
  };
  const auto cdf_left = [p0, &cdf](double x) { return x <= 0.0 ? 0.0 : cdf(x); };
  Rng rng(StreamKey::root(99));
  std::vector<double> xs(4000);
  for (auto& x : xs) x = rng.uniform01() < p0 ? 0.0 : rng.exponential(1.0);
  const double two_sided = ks_distance(xs, cdf, cdf_left);
  CHECK(two_sided < 0.03);
  const double naive = ks_distance(xs, cdf);
  CHECK(naive > 0.3);  // the atom mass lands as spurious error
}

TEST_CASE("moment_check: CLT-scale pass and a shifted-mean failure") {
  Rng rng(StreamKey::root(123));
  std::vector<double> xs(10000);
  for (auto& x : xs) x = rng.exponential(1.0);
  CHECK(moment_check(xs, 1.0, 1.0, 4.0).pass);
  CHECK_FALSE(moment_check(xs, 1.2, 1.0, 4.0).pass);
}

TEST_CASE("bridge supremum matches the exponential law; endpoint scan undershoots") {
  const double lambda = 1.0, step = 0.01, horizon = 40.0;
  const int reps = 6000;
  std::vector<double> bridge, naive;
  bridge.reserve(reps);
  naive.reserve(reps);
  for (int rep = 0; rep < reps; ++rep) {
    Rng r1(StreamKey::root(2024).child_signed(rep));
    bridge.push_back(drifted_sup_sample(lambda, step, horizon, r1, true).sup);
    Rng r2(StreamKey::root(2025).child_signed(rep));
    naive.push_back(drifted_sup_sample(lambda, step, horizon, r2, false).sup);
  }
  const TestReport ks = ks_check(
      "exp-sup-bridge", bridge, [lambda](double x) { return exp_sup_cdf(lambda, x); }, 0.02);
  CHECK(ks.pass);

  // The plain endpoint scan misses in-cell peaks worth ~0.58 sqrt(2 step).
  const double gap = testutil::mean_of(bridge) - testutil::mean_of(naive);
  const double expect = 0.5826 * std::sqrt(2.0 * step);
  CHECK(gap > 0.4 * expect);
  CHECK(gap < 2.0 * expect);
}

TEST_CASE("argmax of the drifted walk follows the closed-form tail") {
  const double lambda = 1.0, step = 0.01, horizon = 60.0;
  const int reps = 4000;
  std::vector<double> arg;
  arg.reserve(reps);
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(StreamKey::root(31337).child_signed(rep));
    arg.push_back(drifted_sup_sample(lambda, step, horizon, rng, true).argmax);
  }
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    long n_gt = 0;
    for (const double a : arg) {
      if (a > t) ++n_gt;
    }
    const double emp = static_cast<double>(n_gt) / reps;
    CHECK(std::abs(emp - argmax_tail(lambda, t)) < 0.03);
  }
}

TEST_CASE("increment sampler: exact atom at zero and the mixed law") {
  const double lambda = 1.0, t = 1.0, step = 0.01, horizon = 50.0;
  const int reps = 8000;
  std::vector<double> ds;
  ds.reserve(reps);
  long zeros = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(StreamKey::root(424242).child_signed(rep));
    const double d = increment_D_sample(lambda, t, step, horizon, rng, true);
    ds.push_back(d);
    if (d == 0.0) ++zeros;  // float-exact by construction
  }
  const double atom = argmax_tail(lambda, t);
  const double emp0 = static_cast<double>(zeros) / reps;
  CHECK(std::abs(emp0 - atom) < 4.0 * std::sqrt(atom * (1.0 - atom) / reps));

  const auto cdf = [&](double z) { return z < 0.0 ? 0.0 : increment_cdf_D(lambda, t, z); };
  const auto cdf_left = [&](double z) { return z <= 0.0 ? 0.0 : increment_cdf_D(lambda, t, z); };
  const TestReport ks = ks_check("increment-mixed-ks", ds, cdf, cdf_left, 0.025);
  CHECK(ks.pass);
}
