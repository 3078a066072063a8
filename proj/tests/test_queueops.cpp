#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <blpp/distlib.hpp>
#include <blpp/envgen.hpp>
#include <blpp/queueops.hpp>

#include <cmath>
#include <vector>

#include "test_util.hpp"

using namespace blpp;

namespace {

QueuePair sampled_pair(const GridSpec& g, double gap, uint64_t seed) {
  const StreamKey k = StreamKey::root(seed);
  QueuePair p;
  p.z = GridFunction(g, sample_brownian(g, gap, k.child(tag::kDrift)));
  p.b = GridFunction(g, sample_brownian(g, 0.0, k.child(tag::kLine)));
  return p;
}

}  // namespace

TEST_CASE("z == b collapses the maps: Q == 0, D == z, R == b") {
  const GridSpec g = GridSpec::make(-1.0, 1.0, 0.1);
  const auto line = sample_brownian(g, 0.4, StreamKey::root(2));
  const QueueOutput fwd = queue_apply(g, line, line);
  const QueueOutput rev = rqueue_apply(g, line, line);
  for (long j = 0; j < g.npts; ++j) {
    CHECK(fwd.q[static_cast<size_t>(j)] == 0.0);
    CHECK(fwd.d[static_cast<size_t>(j)] == line[static_cast<size_t>(j)]);
    CHECK(fwd.r[static_cast<size_t>(j)] == line[static_cast<size_t>(j)]);
    CHECK(rev.q[static_cast<size_t>(j)] == 0.0);
    CHECK(rev.d[static_cast<size_t>(j)] == line[static_cast<size_t>(j)]);
    CHECK(rev.r[static_cast<size_t>(j)] == line[static_cast<size_t>(j)]);
  }
}

TEST_CASE("grid maps match the quadratic double-loop oracle on 8 points") {
  const GridSpec g = GridSpec::make(-0.5, 3.0, 0.5);  // 8 points
  REQUIRE(g.npts == 8);
  const QueuePair p = sampled_pair(g, 1.0, 5);
  const long n = g.npts;

  const QueueOutput fwd = queue_apply(g, p.z.v, p.b.v);
  for (long j = 0; j < n; ++j) {
    double best = -1e300;
    for (long k = j; k < n; ++k) {
      const double zkj = p.z.v[static_cast<size_t>(k)] - p.z.v[static_cast<size_t>(j)];
      const double bkj = p.b.v[static_cast<size_t>(k)] - p.b.v[static_cast<size_t>(j)];
      best = std::max(best, bkj - zkj);
    }
    CHECK(fwd.q[static_cast<size_t>(j)] == doctest::Approx(best).epsilon(1e-12));
    CHECK(fwd.q[static_cast<size_t>(j)] >= 0.0);
  }
  CHECK(fwd.q[static_cast<size_t>(n - 1)] == 0.0);  // scanned-from edge

  const QueueOutput rev = rqueue_apply(g, p.z.v, p.b.v);
  for (long j = 0; j < n; ++j) {
    double best = -1e300;
    for (long k = 0; k <= j; ++k) {
      const double zkj = p.z.v[static_cast<size_t>(j)] - p.z.v[static_cast<size_t>(k)];
      const double bkj = p.b.v[static_cast<size_t>(j)] - p.b.v[static_cast<size_t>(k)];
      best = std::max(best, bkj - zkj);
    }
    CHECK(rev.q[static_cast<size_t>(j)] == doctest::Approx(best).epsilon(1e-12));
  }
  CHECK(rev.q[0] == 0.0);
}

TEST_CASE("conservation d + r = z + b and anchor conventions") {
  const GridSpec g = GridSpec::make(-4.0, 4.0, 0.05);
  for (uint64_t seed : {3ull, 4ull, 5ull}) {
    const QueuePair p = sampled_pair(g, 1.0, seed);
    const QueueOutput fwd = queue_apply(g, p.z.v, p.b.v);
    const QueueOutput rev = rqueue_apply(g, p.z.v, p.b.v);
    const long j0 = g.idx0;
    CHECK(fwd.d[static_cast<size_t>(j0)] == 0.0);
    CHECK(fwd.r[static_cast<size_t>(j0)] == 0.0);
    CHECK(rev.d[static_cast<size_t>(j0)] == 0.0);
    CHECK(rev.r[static_cast<size_t>(j0)] == 0.0);
    for (long j = 0; j < g.npts; ++j) {
      const double zb = p.z.v[static_cast<size_t>(j)] + p.b.v[static_cast<size_t>(j)];
      CHECK(fwd.d[static_cast<size_t>(j)] + fwd.r[static_cast<size_t>(j)] ==
            doctest::Approx(zb).epsilon(1e-9));
      CHECK(rev.d[static_cast<size_t>(j)] + rev.r[static_cast<size_t>(j)] ==
            doctest::Approx(zb).epsilon(1e-9));
    }
  }
}

TEST_CASE("named wrappers agree with the raw outputs") {
  const GridSpec g = GridSpec::make(-1.0, 1.0, 0.25);
  const QueuePair p = sampled_pair(g, 1.0, 6);
  const QueueOutput fwd = queue_apply(g, p.z.v, p.b.v);
  const QueueOutput rev = rqueue_apply(g, p.z.v, p.b.v);
  CHECK(queue_Q(p).v == fwd.q);
  CHECK(queue_D(p).v == fwd.d);
  CHECK(queue_R(p).v == fwd.r);
  CHECK(rqueue_Q(p).v == rev.q);
  CHECK(rqueue_D(p).v == rev.d);
  CHECK(rqueue_R(p).v == rev.r);
}

TEST_CASE("reflection conjugation: forward maps mirror the reverse maps") {
  // Q(z,b)(-t) == Qrev(z~,b~)(t) with the same floats, and the output lines
  // mirror as anchored reflections.
  const GridSpec g = GridSpec::make(-2.0, 2.0, 0.25);
  const QueuePair p = sampled_pair(g, 1.0, 7);
  const QueueOutput fwd = queue_apply(g, p.z.v, p.b.v);
  const QueueOutput rev =
      rqueue_apply(g, reflect_line(g, p.z.v), reflect_line(g, p.b.v));
  const long n = g.npts;
  for (long j = 0; j < n; ++j) {
    CHECK(rev.q[static_cast<size_t>(j)] == fwd.q[static_cast<size_t>(n - 1 - j)]);
    CHECK(rev.d[static_cast<size_t>(j)] == -fwd.d[static_cast<size_t>(n - 1 - j)]);
    CHECK(rev.r[static_cast<size_t>(j)] == -fwd.r[static_cast<size_t>(n - 1 - j)]);
  }
}

TEST_CASE("invert_check: reverse reconstruction to 1e-9 on the spec window") {
  const GridSpec g = GridSpec::make(-20.0, 20.0, 0.01);
  int passed = 0, excluded = 0;
  for (uint64_t seed : {101ull, 102ull, 103ull, 104ull}) {
    const QueuePair p = sampled_pair(g, 1.0, seed);
    const CheckReport r = invert_check(p, g.index_of(-10.0), g.index_of(10.0));
    if (r.n_excluded > 0) {
      ++excluded;
      continue;
    }
    CHECK(r.value <= 1e-9);
    CHECK(r.pass);
    ++passed;
  }
  CHECK(passed >= 3);  // truncation must stay rare at drift gap 1
}

TEST_CASE("invert_check default window is the middle half") {
  const GridSpec g = GridSpec::make(-10.0, 10.0, 0.02);
  const QueuePair p = sampled_pair(g, 1.0, 55);
  const CheckReport r = invert_check(p);
  if (r.n_excluded == 0) CHECK(r.value <= 1e-9);
}

TEST_CASE("pitman identity at a column and swept") {
  const GridSpec g = GridSpec::make(-5.0, 5.0, 0.05);
  const auto line = sample_brownian(g, 0.0, StreamKey::root(12).child(tag::kLine));
  const GridFunction f(g, line);
  const CheckReport at = pitman_check(f, g.index_of(0.0));
  CHECK(at.pass);
  const CheckReport sweep = pitman_sweep(f);
  CHECK(sweep.pass);
  CHECK(sweep.value <= 1e-9);
}

TEST_CASE("drift proxy flags short windows and accepts long ones") {
  // Net drift 2 * 60 = 120 vs five endpoint sigmas ~ 55: comfortably long.
  const GridSpec good = GridSpec::make(-30.0, 30.0, 0.05);
  CHECK(drift_proxy_ok(sampled_pair(good, 2.0, 31)));
  const GridSpec tiny = GridSpec::make(-0.2, 0.2, 0.05);
  CHECK_FALSE(drift_proxy_ok(sampled_pair(tiny, 0.05, 31)));
}

TEST_CASE("attained_interior distinguishes interior from edge suprema") {
  const GridSpec g = GridSpec::make(-0.5, 2.0, 0.5);  // 6 points
  // b - z rises forever: every forward supremum sits at the right edge.
  std::vector<double> z(6, 0.0), b = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  // Anchor both at the grid anchor (index 1).
  for (auto& x : b) x -= 1.0;
  const QueueOutput out = queue_apply(g, z, b);
  CHECK_FALSE(attained_interior(out, 0, g.npts - 2));
  // b - z falls forever: every supremum is immediate (s = t).
  std::vector<double> bf = {1.0, 0.0, -1.0, -2.0, -3.0, -4.0};
  const QueueOutput out2 = queue_apply(g, z, bf);
  CHECK(attained_interior(out2, 0, g.npts - 2));
}

TEST_CASE("bridge mode: departure increments follow the drifted Gaussian law") {
  // With exact interval maxima the output line has the continuum departure
  // law; grid evaluation of D(0,1) is then N(gap, 1) up to window truncation.
  const GridSpec g = GridSpec::make(-14.0, 6.0, 0.05);
  const double gap = 1.0;
  const int reps = 1500;
  std::vector<double> incs;
  incs.reserve(reps);
  const long j0 = g.idx0, j1 = g.index_of(1.0);
  for (int rep = 0; rep < reps; ++rep) {
    const StreamKey k = StreamKey::root(9000).child_signed(rep);
    std::vector<double> z = sample_brownian(g, gap, k.child(tag::kDrift));
    std::vector<double> b = sample_brownian(g, 0.0, k.child(tag::kLine));
    Rng rng(k.child(tag::kBridge));
    const QueueOutput out = queue_apply(g, z, b, SupMode::Bridge, &rng);
    incs.push_back(out.d[static_cast<size_t>(j1)] - out.d[static_cast<size_t>(j0)]);
  }
  const TestReport ks = ks_check(
      "bridge-departure-gauss", incs,
      [gap](double x) { return normal_cdf(x - gap); }, 0.05);
  CHECK(ks.pass);
}

TEST_CASE("departure and unused-service increments over disjoint windows decorrelate") {
  const GridSpec g = GridSpec::make(-14.0, 6.0, 0.05);
  const int reps = 800;
  std::vector<double> d01, r12;
  for (int rep = 0; rep < reps; ++rep) {
    const StreamKey k = StreamKey::root(9100).child_signed(rep);
    std::vector<double> z = sample_brownian(g, 1.0, k.child(tag::kDrift));
    std::vector<double> b = sample_brownian(g, 0.0, k.child(tag::kLine));
    const QueueOutput out = queue_apply(g, z, b);
    const long j0 = g.idx0, j1 = g.index_of(1.0), j2 = g.index_of(2.0);
    d01.push_back(out.d[static_cast<size_t>(j1)] - out.d[static_cast<size_t>(j0)]);
    r12.push_back(out.r[static_cast<size_t>(j2)] - out.r[static_cast<size_t>(j1)]);
  }
  CHECK(std::abs(testutil::corr_of(d01, r12)) < 4.0 / std::sqrt(static_cast<double>(reps)));
}
