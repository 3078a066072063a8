#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <blpp/grid.hpp>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "test_util.hpp"

using namespace blpp;

TEST_CASE("GridSpec::make canonicalizes an on-grid window") {
  const GridSpec g = GridSpec::make(-1.0, 2.0, 0.5);
  CHECK(g.step == 0.5);
  CHECK(g.idx0 == 2);
  CHECK(g.npts == 7);
  CHECK(g.time(g.idx0) == 0.0);  // bit-exact anchor
  CHECK(g.t_min() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(g.t_max() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g.n_intervals() == 6);
  CHECK(g.contains_index(0));
  CHECK(g.contains_index(6));
  CHECK_FALSE(g.contains_index(7));
  CHECK_FALSE(g.contains_index(-1));
}

TEST_CASE("GridSpec::make rejects malformed windows") {
  CHECK_THROWS_AS(GridSpec::make(-1.0, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::make(-1.0, 2.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::make(0.0, 2.0, 0.5), std::invalid_argument);   // t_min not < 0
  CHECK_THROWS_AS(GridSpec::make(-1.0, 0.0, 0.5), std::invalid_argument);  // t_max not > 0
  CHECK_THROWS_AS(GridSpec::make(1.0, 2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::make(-1.03, 1.0, 0.1), std::invalid_argument);  // off-grid edge
  CHECK_THROWS_AS(GridSpec::make(-1.0, 1.07, 0.1), std::invalid_argument);
}

TEST_CASE("GridSpec::make tolerates sub-1e-6*step edge jitter") {
  const GridSpec g = GridSpec::make(-1.0 + 1e-8, 1.0 - 1e-8, 0.1);
  CHECK(g.npts == 21);
  CHECK(g.idx0 == 10);
}

TEST_CASE("index_of and on_grid round-trip every grid time") {
  const GridSpec g = GridSpec::make(-0.6, 1.4, 0.2);
  for (long j = 0; j < g.npts; ++j) {
    CHECK(g.on_grid(g.time(j)));
    CHECK(g.index_of(g.time(j)) == j);
  }
  CHECK_FALSE(g.on_grid(0.07));
  CHECK_THROWS_AS(g.index_of(0.07), std::invalid_argument);
  CHECK_THROWS_AS(g.index_of(9.0), std::invalid_argument);  // outside window
}

TEST_CASE("times come from one multiplication, never accumulation") {
  // With step = 0.1 (inexact in binary) the k-th time must equal k*step
  // exactly, not a running sum that drifts.
  const GridSpec g = GridSpec::make(-10.0, 10.0, 0.1);
  for (long j = 0; j < g.npts; ++j) {
    const double direct = static_cast<double>(j - g.idx0) * 0.1;
    CHECK(g.time(j) == direct);
  }
}

TEST_CASE("symmetric() detects windows mirrored about 0") {
  CHECK(GridSpec::make(-1.0, 1.0, 0.1).symmetric());
  CHECK_FALSE(GridSpec::make(-1.0, 2.0, 0.5).symmetric());
}

TEST_CASE("GridSpec equality is field-wise") {
  const GridSpec a = GridSpec::make(-1.0, 1.0, 0.1);
  const GridSpec b = GridSpec::make(-1.0, 1.0, 0.1);
  const GridSpec c = GridSpec::make(-1.0, 1.1, 0.1);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("GridFunction validates size and evaluates increments") {
  const GridSpec g = GridSpec::make(-0.5, 1.0, 0.5);  // 4 points
  CHECK_THROWS_AS(GridFunction(g, {1.0, 2.0}), std::invalid_argument);
  const GridFunction f(g, {3.0, 0.0, 1.5, -2.0});
  CHECK(f.size() == 4);
  CHECK(f[0] == 3.0);
  CHECK(f.at_time(0.0) == 0.0);
  CHECK(f.at_time(1.0) == -2.0);
  CHECK(f.increment(-0.5, 1.0) == -2.0 - 3.0);
  CHECK(f.increment(0.0, 0.5) == 1.5);
  CHECK(f.increment(0.5, 0.5) == 0.0);
}

TEST_CASE("format_sig12 keeps 12 significant digits") {
  const double xs[] = {0.0, 1.0, -1.0, 3.14159265358979, 1e-13, -2.25e17, 0.1};
  for (const double x : xs) {
    const double back = std::strtod(format_sig12(x).c_str(), nullptr);
    CHECK(std::abs(back - x) <= 1e-11 * std::max(1.0, std::abs(x)));
  }
  // 12 digits resolve adjacent values that differ in the 12th place.
  CHECK(format_sig12(1.00000000001) != format_sig12(1.00000000002));
}

TEST_CASE("grid CSV round-trips spec and values to 12 digits") {
  const GridSpec g = GridSpec::make(-1.0, 1.5, 0.25);
  std::vector<double> v(static_cast<size_t>(g.npts));
  for (long j = 0; j < g.npts; ++j) {
    v[static_cast<size_t>(j)] = std::sin(static_cast<double>(j)) * 10.0;
  }
  const GridFunction f(g, v);

  testutil::ScratchDir dir("grid_csv");
  const std::string path = dir.sub("f.csv");
  write_grid_csv(path, f);

  const std::string raw = testutil::slurp(path);
  CHECK(raw.rfind("t,value\n", 0) == 0);            // header first
  CHECK(raw.find("\r") == std::string::npos);       // LF only

  const GridFunction back = read_grid_csv(path);
  REQUIRE(back.spec == f.spec);
  for (long j = 0; j < g.npts; ++j) {
    CHECK(back[j] == doctest::Approx(f[j]).epsilon(1e-11));
  }
}

TEST_CASE("read_grid_csv rejects junk") {
  testutil::ScratchDir dir("grid_bad");
  {
    std::ofstream out(dir.sub("nohdr.csv"));
    out << "0.0,1.0\n0.5,2.0\n1.0,3.0\n";
  }
  CHECK_THROWS_AS(read_grid_csv(dir.sub("nohdr.csv")), std::runtime_error);
  CHECK_THROWS_AS(read_grid_csv(dir.sub("missing.csv")), std::runtime_error);
}
