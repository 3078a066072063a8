#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <blpp/lpp.hpp>
#include <blpp/rng.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace blpp;

namespace {

BrownianField small_field(const GridSpec& g, int levels, uint64_t seed) {
  return sample_field(g, 0, levels - 1, seed);
}

PassagePath vertical_path(int lo, int hi, long j) {
  PassagePath p;
  p.lo_level = lo;
  p.hi_level = hi;
  p.start_idx = j;
  p.end_idx = j;
  p.jump_idx.assign(static_cast<size_t>(hi - lo + 1), j);
  return p;
}

}  // namespace

TEST_CASE("a vertical path has zero energy") {
  const GridSpec g = GridSpec::make(-1.0, 1.0, 0.25);
  const BrownianField f = small_field(g, 4, 3);
  for (long j = 0; j < g.npts; ++j) {
    CHECK(energy(f, vertical_path(0, 3, j)) == 0.0);
  }
}

TEST_CASE("a single-level path is one horizontal increment") {
  const GridSpec g = GridSpec::make(-1.0, 1.0, 0.25);
  const BrownianField f = small_field(g, 3, 4);
  PassagePath p;
  p.lo_level = p.hi_level = 1;
  p.start_idx = 1;
  p.end_idx = 6;
  p.jump_idx = {6};
  CHECK(energy(f, p) == doctest::Approx(f.increment_idx(1, 1, 6)).epsilon(1e-15));
}

TEST_CASE("PassagePath accessors and validity") {
  PassagePath p;
  p.lo_level = 1;
  p.hi_level = 3;
  p.start_idx = 0;
  p.end_idx = 5;
  p.jump_idx = {2, 2, 5};
  CHECK(p.valid());
  CHECK(p.enter_idx(1) == 0);
  CHECK(p.leave_idx(1) == 2);
  CHECK(p.enter_idx(2) == 2);
  CHECK(p.leave_idx(2) == 2);
  CHECK(p.enter_idx(3) == 2);
  CHECK(p.leave_idx(3) == 5);
  p.jump_idx = {2, 1, 5};  // decreasing jump columns
  CHECK_FALSE(p.valid());
}

TEST_CASE("dynamic program equals exhaustive enumeration bit-for-bit") {
  // Random small geometries, the acceptance-scale oracle in miniature.
  Rng geo(StreamKey::root(17));
  for (int rep = 0; rep < 25; ++rep) {
    const int levels = 2 + static_cast<int>(geo.next_u64() % 3);   // 2..4
    const long npts = 3 + static_cast<long>(geo.next_u64() % 6);   // 3..8
    const GridSpec g = GridSpec::make(-0.25, 0.25 * static_cast<double>(npts - 2), 0.25);
    const BrownianField f = small_field(g, levels, 400 + static_cast<uint64_t>(rep));
    const long js = static_cast<long>(geo.next_u64() % static_cast<uint64_t>(npts));
    const long jt = js + static_cast<long>(geo.next_u64() % static_cast<uint64_t>(npts - js));
    const double dp = last_passage_value(f, 0, js, levels - 1, jt);
    const double en = last_passage_enumerated(f, 0, js, levels - 1, jt);
    CHECK(dp == en);
  }
}

TEST_CASE("backtrack reproduces the table value bit-for-bit") {
  const GridSpec g = GridSpec::make(-1.0, 4.0, 0.25);
  const BrownianField f = small_field(g, 5, 9);
  const LppTable t = last_passage(f, 0, 2, 4, 18);
  for (const Side side : {Side::Left, Side::Right}) {
    const PassagePath p = backtrack(f, t, 18, side);
    CHECK(p.valid());
    CHECK(energy(f, p) == t.value(4, 18));
  }
}

TEST_CASE("Left and Right coincide on generic samples") {
  const GridSpec g = GridSpec::make(-1.0, 3.0, 0.2);
  for (uint64_t seed : {11ull, 12ull, 13ull}) {
    const BrownianField f = small_field(g, 4, seed);
    const LppTable t = last_passage(f, 0, 0, 3, g.npts - 1);
    const PassagePath l = backtrack(f, t, g.npts - 1, Side::Left);
    const PassagePath r = backtrack(f, t, g.npts - 1, Side::Right);
    CHECK(l.jump_idx == r.jump_idx);
  }
}

TEST_CASE("constructed tie: Left is coordinatewise below Right") {
  // Two identical flat lines make every staircase optimal; the tie-break
  // must pick extremal jump columns.
  const GridSpec g = GridSpec::make(-0.5, 1.5, 0.5);  // 5 points
  BrownianField f;
  f.spec = g;
  f.lo = 0;
  f.lines = {std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
  const LppTable t = last_passage(f, 0, 0, 1, 4);
  const PassagePath l = backtrack(f, t, 4, Side::Left);
  const PassagePath r = backtrack(f, t, 4, Side::Right);
  REQUIRE(l.jump_idx.size() == r.jump_idx.size());
  for (size_t k = 0; k < l.jump_idx.size(); ++k) {
    CHECK(l.jump_idx[k] <= r.jump_idx[k]);
  }
  CHECK(l.jump_idx.front() == 0);  // leaves level 0 immediately
  CHECK(r.jump_idx.front() == 4);  // rides level 0 to the end
  CHECK(energy(f, l) == energy(f, r));
}

TEST_CASE("superadditivity across an intermediate point") {
  const GridSpec g = GridSpec::make(-1.0, 3.0, 0.1);
  Rng geo(StreamKey::root(23));
  for (int rep = 0; rep < 30; ++rep) {
    const BrownianField f = small_field(g, 5, 700 + static_cast<uint64_t>(rep));
    const long js = static_cast<long>(geo.next_u64() % 10);
    const long ju = g.npts - 1 - static_cast<long>(geo.next_u64() % 10);
    const long jt = js + static_cast<long>(geo.next_u64() % static_cast<uint64_t>(ju - js + 1));
    const int mid = 1 + static_cast<int>(geo.next_u64() % 3);
    const double whole = last_passage_value(f, 0, js, 4, ju);
    const double part =
        last_passage_value(f, 0, js, mid, jt) + last_passage_value(f, mid, jt, 4, ju);
    CHECK(whole >= part - 1e-9);
  }
}

TEST_CASE("point_to_line with a pinning boundary recovers point-to-point") {
  const GridSpec g = GridSpec::make(-1.0, 2.0, 0.25);
  const BrownianField f = small_field(g, 4, 31);
  const long js = 2;
  for (const long pin : {4L, 7L, g.npts - 1}) {
    std::vector<double> boundary(static_cast<size_t>(g.npts), 1e18);
    boundary[static_cast<size_t>(pin)] = 0.0;
    const PointToLine res = point_to_line(f, 0, js, 3, g.npts - 1, boundary, Side::Left);
    CHECK(res.terminal_idx == pin);
    CHECK(res.value == last_passage_value(f, 0, js, 3, pin));
    CHECK(energy(f, res.path) == res.value);
  }
}

TEST_CASE("point_to_line with zero boundary maximizes the top row") {
  const GridSpec g = GridSpec::make(-1.0, 2.0, 0.25);
  const BrownianField f = small_field(g, 3, 57);
  const PointToLine res = point_to_line(f, 0, 0, 2, g.npts - 1, {}, Side::Left);
  double best = -1e300;
  for (long j = 0; j < g.npts; ++j) {
    best = std::max(best, last_passage_value(f, 0, 0, 2, j));
  }
  CHECK(res.value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("crossing inequalities hold on randomized quadruples") {
  const GridSpec g = GridSpec::make(-1.0, 2.0, 0.1);
  Rng geo(StreamKey::root(41));
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const BrownianField f = small_field(g, 4, 900 + static_cast<uint64_t>(rep));
    std::vector<long> js(4);
    for (auto& j : js) j = static_cast<long>(geo.next_u64() % static_cast<uint64_t>(g.npts));
    std::sort(js.begin(), js.end());
    if (js[0] == js[1] || js[1] == js[2] || js[2] == js[3]) continue;
    const CheckReport r = crossing_inequalities(f, 0, 3, js[0], js[1], js[2], js[3]);
    worst = std::max(worst, r.value);
    CHECK(r.pass);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("enumeration refuses oversized geometries") {
  const GridSpec g = GridSpec::make(-1.0, 30.0, 0.1);
  const BrownianField f = small_field(g, 6, 3);
  CHECK_THROWS_AS(last_passage_enumerated(f, 0, 0, 5, g.npts - 1, 1000),
                  std::invalid_argument);
}
