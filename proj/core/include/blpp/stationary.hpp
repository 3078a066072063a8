#pragma once

#include <blpp/check.hpp>
#include <blpp/envgen.hpp>
#include <blpp/queueops.hpp>

#include <string>
#include <vector>

namespace blpp {

// Brownian queues in series driven by the field's driftless lines:
//   Y_0(t) = -B_0(t) + lambda * t                       (exact, same floats)
//   q_m = Qrev(Y_{m-1}, B_m),   Y_m = Drev(Y_{m-1}, B_m),
//   W_{m-1} = Rrev(Y_{m-1}, B_m)                        for m = 1..n.
// Every Y_m is a drift-lambda Brownian line, q_m(t) ~ Exp(lambda), and the
// W_m are independent driftless Brownian lines. The reverse maps scan
// prefixes, so truncation bites at the LEFT window edge; first_certified
// tracks the earliest column per level whose supremum sat strictly inside.
struct StationaryStack {
  GridSpec spec;
  double lambda = 0.0;
  int n = 0;                          // recursion depth: Y_0..Y_n
  std::vector<GridFunction> Y;        // Y[m] is Y_m, m in 0..n
  std::vector<GridFunction> q;        // q[m-1] is q_m, m in 1..n
  std::vector<GridFunction> W;        // W[m] is W_m, m in 0..n-1
  std::vector<long> first_certified;  // per m in 1..n (size n)

  const GridFunction& y_line(int m) const;
  const GridFunction& q_line(int m) const;  // m in 1..n
  const GridFunction& w_line(int m) const;  // m in 0..n-1
  // Smallest column from which no prefix supremum in levels 1..m could have
  // been clipped by the left window edge (npts when some level never was).
  long certified_lo(int m) const;
};

// Runs the recursion to depth n_levels; the field must cover levels
// 0..n_levels. Grid-mode queue maps throughout (structural identities hold
// exactly; the marginals are Exp/BM up to grid discretization).
StationaryStack build_stationary(const Field& field, double lambda, int n_levels);

// Which side of t_1 the Y_0 probe increment sits on. Staircase follows the
// independence statement (future of t_1). OverlapControl flips it to the past
// of t_1 — inside the segment the queue functional q_1(t_1) reads — which is
// constitutively dependent and must trip the correlation bound.
enum class BurkeProbe { Staircase, OverlapControl };

// One scalar representative per independence block, for one realization.
// With k = times.size() levels (t_k <= ... <= t_1, all on grid) the blocks
// are, in order:
//   W_0(t_1 - a, t_1), q_1(t_1), Y_0(t_1, t_1 + a),
//   for r = 1..k-1:  W_r(t_{r+1} - a, t_{r+1}), q_{r+1}(t_{r+1}),
//                    Y_r(t_{r+1}, t_r),  B_r(t_r, t_r + a),
//   Y_k(t_k - a, t_k), B_k(t_k, t_k + a)
// where a = probe_len (4k + 1 scalars in total).
struct BurkeBlocks {
  std::vector<std::string> name;
  std::vector<double> value;
  bool certified = true;  // false: a probed prefix argmax touched the left edge
};
BurkeBlocks burke_blocks(const StationaryStack& stack, const Field& field,
                         const std::vector<double>& times, double probe_len,
                         BurkeProbe probe = BurkeProbe::Staircase);

// Block values over `replicas` fresh fields, one row per certified replica
// (replicas whose probed prefix argmaxes touched the left window edge are
// counted in `excluded` instead).
struct BurkeSample {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  long excluded = 0;
};
BurkeSample burke_sample(const GridSpec& spec, double lambda,
                         const std::vector<double>& times, int replicas,
                         uint64_t seed, double probe_len = 0.5,
                         BurkeProbe probe = BurkeProbe::Staircase);

// Monte Carlo independence probe: samples `replicas` fresh fields, builds the
// stack on each, extracts the blocks, and bounds every pairwise Pearson
// correlation. Passes when max |rho| < 4 / sqrt(replicas used). Replicas whose
// prefix argmaxes touched the left window edge at a probed column are
// excluded, not failed. Unordered times or off-grid probes -> invalid_argument.
CheckReport burke_check(const GridSpec& spec, double lambda,
                        const std::vector<double>& times, int replicas,
                        uint64_t seed, double probe_len = 0.5,
                        BurkeProbe probe = BurkeProbe::Staircase);
CheckReport burke_check(const BurkeSample& sample);

// Distance-correlation spot check on one block pair (q_1(t_1) vs the Y_0
// probe): permutation test, pass when the observed dCor does not exceed the
// (1 - 1/(permutations+1)) quantile of the permuted null. Quadratic in
// replicas — keep replicas ~1e3.
CheckReport burke_dcor_check(const GridSpec& spec, double lambda,
                             const std::vector<double>& times, int replicas,
                             uint64_t seed, double probe_len = 0.5,
                             BurkeProbe probe = BurkeProbe::Staircase,
                             int permutations = 199);
CheckReport burke_dcor_check(const BurkeSample& sample, uint64_t seed,
                             int permutations = 199);

// Finite-n sandwich for one realization: with delta_hat < lambda^-2 <
// gamma_hat and rays (n, n*delta_hat), (n, n*gamma_hat) on the grid, the
// W-environment differences bracket the stationary quantities,
//   L_{(0,t),(n,nd)}(W) - L_{(0,s),(n,nd)}(W) <= -Y_0(s,t)
//                                             <= L_{(0,t),(n,ng)}(W) - L_{(0,s),(n,ng)}(W)
// and the vertical analogue around q_1(t):
//   L_{(0,t),(n,nd)}(W) - L_{(1,t),(n,nd)}(W) <= q_1(t)
//                                             <= L_{(0,t),(n,ng)}(W) - L_{(1,t),(n,ng)}(W)
// in the W-environment of the stack built from `field` (levels 0..n+1 needed).
// Returns the outside-excess of each middle quantity relative to its bracket
// interval (0 when inside), or certified=false on left-edge truncation.
//
// Once the two starts' geodesics toward a ray share their junction for both
// rays -- the typical case unless the direction interval [delta_hat,
// gamma_hat] captures a jump of the direction process -- both differences
// coincide and the asymptotic statement pins the middle quantity to that
// common value exactly. A grid simulation reproduces that equality only to
// the within-cell supremum deficit, which scales like sqrt(step), so
// meaningful bracketing tests allow a tolerance of that order. Excess
// quantiles measured over 16x step range confirm the sqrt(step) scaling.
struct SandwichGaps {
  double excess_y = 0.0;  // distance of -Y_0(s,t) outside [diff_delta, diff_gamma]
  double excess_q = 0.0;  // distance of q_1(t) outside its bracket
  bool certified = false;
};
SandwichGaps sandwich_gaps(const Field& field, double lambda, double delta_hat,
                           double gamma_hat, double s, double t, int n);

// +1 when both excesses are <= tol (plus a 1e-9 float slack), 0 when not,
// -1 excluded (left-edge truncation). tol = 0 tests the strict ordering.
int sandwich_holds(const Field& field, double lambda, double delta_hat,
                   double gamma_hat, double s, double t, int n, double tol = 0.0);

// Fraction of replicas where the finite-n ordering brackets the stationary
// quantities within tol; value = 1 - fraction, threshold = 1 - min_fraction.
// The strict (tol = 0) fraction is reported in the detail string.
CheckReport sandwich_check(const GridSpec& spec, double lambda, double delta_hat,
                           double gamma_hat, double s, double t, int n,
                           int replicas, uint64_t seed, double min_fraction = 0.8,
                           double tol = 0.0);

// Serialization: Y_<m>.csv, q_<m>.csv, W_<m>.csv plus a plain-text key:value
// manifest stack.json (t_min, t_max, step, lambda, levels, first_certified).
void write_stationary(const std::string& dir, const StationaryStack& stack);
StationaryStack read_stationary(const std::string& dir);

}  // namespace blpp
