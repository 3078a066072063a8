#pragma once

#include <blpp/check.hpp>
#include <blpp/envgen.hpp>
#include <blpp/queueops.hpp>

#include <string>
#include <vector>

namespace blpp {

// One level of the limiting-profile stack in a fixed direction theta:
//   h       horizontal profile on the level (two-sided BM, drift 1/sqrt(theta)),
//   v       vertical profile (>= 0; v(t) ~ Exp(1/sqrt(theta)) at fixed t),
//   x_dual  dual line (driftless BM under the limit law), feeds the
//           southwest dual environment.
// attain[j] is the grid index realizing the supremum that defined column j
// in the map that produced this level; it is nondecreasing in j and is the
// truncation record: a column whose supremum sits at the far window edge is
// not certified.
struct BusemannSlice {
    int level = 0;
    GridFunction h, v, x_dual;
    std::vector<long> attain;

    // Largest column whose supremum is attained at index <= npts-3 (strictly
    // interior); -1 when no column is certified.
    long certified_hi() const;
};

enum class StackSampler { Recursion, LimitEstimate };

// Profiles h_m, v_m, X_m for a contiguous range of levels sharing one
// environment and one direction. Built top-down: an independent seed line
// with the stationary drift enters `padding` levels above the highest kept
// level, and each step down feeds (h_u, B_{u-1}) through the forward queue
// maps: h_{u-1} = D, v_u = Q, X_u = R. Each step is a fixed point of the
// marginal law, so the extra levels wash out the seed.
struct BusemannStack {
    GridSpec spec;
    double theta = 1.0;
    int lo = 0, hi = 0;      // kept slice range
    int seed_level = 0;      // level where the seed line entered
    uint64_t seed = 0;       // environment seed (streams: seed line, bridge draws)
    SupMode mode = SupMode::Grid;
    StackSampler sampler = StackSampler::Recursion;
    std::vector<BusemannSlice> slices;  // slices[k] = level lo + k

    bool has_level(int lv) const { return lv >= lo && lv <= hi; }
    const BusemannSlice& slice(int lv) const;
};

// Default seed-level padding above the top kept level: max(10, ceil(4/theta))
// fixed-point applications.
int default_seed_padding(double theta);

// Top-down sampler. Requires field levels lo-1 .. seed_level-1 and
// seed_level > hi. Bridge mode draws the interval suprema of each descent
// from its own stream, making the kept marginals follow the continuum laws;
// grid mode keeps the piecewise-linear path semantics exact (structural
// checks, geodesics).
BusemannStack sample_busemann_recursion(const BrownianField& field, double theta,
                                        int seed_level, int lo, int hi,
                                        SupMode mode = SupMode::Grid);

// Finite-n estimator of the limit profile difference:
//   L_{(m, t(js)), (n, jn)} - L_{(k, t(jt)), (n, jn)},
// where jn is the grid index nearest n*theta. The terminal ray must lie
// inside the window and weakly above both starts.
double estimate_busemann_limit(const Field& field, double theta, int m, long js,
                               int k, long jt, int n);

// Last-passage values from every start (r, j), r in [m, n], j <= jt, to the
// fixed terminal (n, jt): the reverse dynamic program
//   T[n][jt] = 0, T[r][j] = max(T[r][j+1] + B_r(j, j+1), T[r+1][j]).
// Rows align with levels m..n; columns 0..jt.
std::vector<std::vector<double>> last_passage_to_point(const Field& f, int m, int n,
                                                       long jt);

// The dual lines X_lo..X_hi assembled as an environment for lpp/geodesics.
Field dual_field(const BusemannStack& stack);

// Coupled direction monotonicity via finite-n estimators on one field and one
// terminal level n: with gamma < theta and terminals (n, n*gamma), (n, n*theta),
//   v-estimates:  L_{(m,s)} - L_{(m+1,s)} is >= 0 and nondecreasing in the
//                 terminal ray, so vhat^gamma(s) <= vhat^theta(s);
//   h-estimates:  hhat^theta(s,t) <= hhat^gamma(s,t) for s < t.
// Both orderings are deterministic consequences of path crossing, so the
// check uses `tol` only to absorb float regrouping. value = worst violation.
CheckReport monotonicity_check(const Field& field, double gamma, double theta,
                               int m, int n, double tol = 1e-9);

// Reverse-map round trip on every interior stack pair (h_m, B_{m-1}) via
// queueops::invert_check. Grid-mode stacks only: the bridge sampler's extra
// randomness is not a function of the kept lines, so no reverse identity is
// available. value = worst interior deviation; truncation-limited pairs are
// excluded and counted.
CheckReport reversal_duality_check(const BusemannStack& stack, const Field& field,
                                   double tol = 1e-9);

// Construction identity v_{m}(s) + h_{m}(s,t) == h_{m-1}(s,t) + v_{m}(t) for
// every consecutive pair of kept levels, all on-grid s < t reduced to adjacent
// columns. Holds to float regrouping by construction.
CheckReport additivity_check(const BusemannStack& stack, double tol = 1e-9);

// Serialization: h_<m>.csv, v_<m>.csv, X_<m>.csv per kept level plus a
// key:value manifest stack.json (grid, theta, level range, seed level, seed,
// mode, sampler).
void write_stack(const std::string& dir, const BusemannStack& stack);
BusemannStack read_stack(const std::string& dir);

}  // namespace blpp
