#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <blpp/distlib.hpp>
#include <blpp/envgen.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "test_util.hpp"

using namespace blpp;

TEST_CASE("lines are anchored to 0 at time 0") {
  const GridSpec g = GridSpec::make(-2.0, 3.0, 0.1);
  for (uint64_t seed : {1ull, 7ull, 42ull}) {
    const auto line = sample_brownian(g, 0.7, StreamKey::root(seed));
    CHECK(line[static_cast<size_t>(g.idx0)] == 0.0);  // bit-exact
  }
}

TEST_CASE("same (seed, level) is bit-identical; different seeds differ") {
  const GridSpec g = GridSpec::make(-1.0, 2.0, 0.05);
  const BrownianField a = sample_field(g, 0, 3, 99);
  const BrownianField b = sample_field(g, 0, 3, 99);
  const BrownianField c = sample_field(g, 0, 3, 100);
  for (int lv = 0; lv <= 3; ++lv) {
    REQUIRE(a.line(lv).size() == b.line(lv).size());
    for (size_t j = 0; j < a.line(lv).size(); ++j) {
      CHECK(a.line(lv)[j] == b.line(lv)[j]);
    }
  }
  CHECK(a.line(0)[0] != c.line(0)[0]);
  CHECK(a.line(1) != c.line(1));
}

TEST_CASE("widening the window never changes values at shared grid points") {
  const GridSpec narrow = GridSpec::make(-1.0, 1.0, 0.1);
  const GridSpec wide = GridSpec::make(-2.0, 3.0, 0.1);
  const BrownianField a = sample_field(narrow, 0, 2, 5);
  const BrownianField b = sample_field(wide, 0, 2, 5);
  for (int lv = 0; lv <= 2; ++lv) {
    for (long j = 0; j < narrow.npts; ++j) {
      const double t = narrow.time(j);
      const long jw = wide.index_of(t);
      CHECK(a.line(lv)[static_cast<size_t>(j)] == b.line(lv)[static_cast<size_t>(jw)]);
    }
  }
}

TEST_CASE("a line does not depend on the requested level range") {
  const GridSpec g = GridSpec::make(-1.0, 1.0, 0.1);
  const BrownianField a = sample_field(g, 0, 5, 11);
  const BrownianField b = sample_field(g, 3, 3, 11);
  CHECK(a.line(3) == b.line(3));
  CHECK(b.lo_level() == 3);
  CHECK(b.hi_level() == 3);
  CHECK_THROWS_AS(sample_field(g, 2, 1, 11), std::invalid_argument);
}

TEST_CASE("per-step increments are standard Gaussian (KS at a pinned seed)") {
  const double step = 0.05;
  const GridSpec g = GridSpec::make(-1.0, 2500.0, step);  // ~5e4 increments
  const auto line = sample_brownian(g, 0.0, StreamKey::root(314).child(tag::kLine));
  std::vector<double> zs;
  zs.reserve(static_cast<size_t>(g.npts - 1));
  const double scale = 1.0 / std::sqrt(step);
  for (long j = 0; j + 1 < g.npts; ++j) {
    zs.push_back((line[static_cast<size_t>(j + 1)] - line[static_cast<size_t>(j)]) * scale);
  }
  const TestReport r = ks_check("envgen-step-gauss", zs,
                                [](double x) { return normal_cdf(x); }, 0.01);
  CHECK(r.pass);
}

TEST_CASE("drift shifts the mean increment by drift*step") {
  const double step = 0.02, drift = 1.5;
  const GridSpec g = GridSpec::make(-1.0, 400.0, step);
  const auto line = sample_brownian(g, drift, StreamKey::root(8).child(tag::kDrift));
  std::vector<double> incs;
  for (long j = 0; j + 1 < g.npts; ++j) {
    incs.push_back(line[static_cast<size_t>(j + 1)] - line[static_cast<size_t>(j)]);
  }
  const TestReport r = moment_check(incs, drift * step, step, 4.0);
  CHECK(r.pass);
}

TEST_CASE("levels are mutually independent (correlation bound over replicas)") {
  const GridSpec g = GridSpec::make(-0.5, 1.0, 0.5);
  const int reps = 400;
  std::vector<double> i0, i1;
  for (int rep = 0; rep < reps; ++rep) {
    const BrownianField f = sample_field(g, 0, 1, 1000 + static_cast<uint64_t>(rep));
    i0.push_back(f.increment(0, 0.0, 1.0));
    i1.push_back(f.increment(1, 0.0, 1.0));
  }
  CHECK(std::abs(testutil::corr_of(i0, i1)) < 4.0 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("Field::increment matches index arithmetic and guards levels") {
  const GridSpec g = GridSpec::make(-1.0, 1.0, 0.25);
  const BrownianField f = sample_field(g, 2, 4, 77);
  const auto& b3 = f.line(3);
  CHECK(f.increment(3, -1.0, 0.75) ==
        b3[static_cast<size_t>(g.index_of(0.75))] - b3[static_cast<size_t>(g.index_of(-1.0))]);
  CHECK(f.increment_idx(3, 0, 5) == b3[5] - b3[0]);
  CHECK(f.has_level(2));
  CHECK_FALSE(f.has_level(5));
  CHECK_THROWS(f.line(1));
}

TEST_CASE("reflect is an involution and flips increments") {
  const GridSpec g = GridSpec::make(-1.5, 1.5, 0.25);
  const BrownianField f = sample_field(g, 0, 0, 21);
  const GridFunction fn(g, f.line(0));
  const GridFunction r = reflect(fn);
  // f~(t) = -f(-t), same floats (negation is exact).
  for (long j = 0; j < g.npts; ++j) {
    CHECK(r[j] == -fn[g.npts - 1 - j]);
  }
  const GridFunction rr = reflect(r);
  for (long j = 0; j < g.npts; ++j) CHECK(rr[j] == fn[j]);
  // Increments reverse orientation: f~(s,t) = f(-t,-s).
  CHECK(r.increment(-1.0, 0.5) == fn.increment(-0.5, 1.0));

  const GridSpec asym = GridSpec::make(-1.0, 2.0, 0.25);
  const GridFunction bad(asym, std::vector<double>(static_cast<size_t>(asym.npts), 0.0));
  CHECK_THROWS_AS(reflect(bad), std::invalid_argument);
}

TEST_CASE("field CSV round-trip preserves spec, levels, seed, drift") {
  const GridSpec g = GridSpec::make(-1.0, 2.0, 0.25);
  BrownianField f = sample_field(g, 1, 3, 123, 0.5);
  testutil::ScratchDir dir("field_io");
  write_field(dir.path(), f);
  const BrownianField back = read_field(dir.path());
  CHECK(back.spec == f.spec);
  CHECK(back.lo_level() == 1);
  CHECK(back.hi_level() == 3);
  CHECK(back.seed == 123);
  CHECK(back.drift == 0.5);
  for (int lv = 1; lv <= 3; ++lv) {
    for (size_t j = 0; j < f.line(lv).size(); ++j) {
      CHECK(back.line(lv)[j] == doctest::Approx(f.line(lv)[j]).epsilon(1e-11));
    }
  }
}
