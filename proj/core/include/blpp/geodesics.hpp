#pragma once

#include <blpp/busemann.hpp>
#include <blpp/check.hpp>
#include <blpp/envgen.hpp>
#include <blpp/lpp.hpp>

#include <string>
#include <vector>

namespace blpp {

// Northeast semi-infinite path in direction theta, built from the profile
// stack by sequential argmax: the path leaves level r at
//   tau_r = argmax_{u >= tau_{r-1}} { B_r(u) - h_{r+1}(u) },
// ties by side (Left = smallest, Right = largest, exact float equality).
// The integrand has convex interior vertices only, so grid argmaxes are the
// continuum argmaxes of the piecewise-linear environment and land on grid
// columns.
//
// jump_idx[0] is the start column (the conventional tau_{m-1} = t);
// jump_idx[k], k >= 1, is tau_{m+k-1}. truncated[k] marks an argmax that
// touched the right window edge.
struct SemiInfGeodesic {
    GridSpec spec;
    int start_level = 0;
    long start_idx = 0;
    double theta = 1.0;
    Side side = Side::Left;
    std::vector<long> jump_idx;
    std::vector<bool> truncated;

    int jumps() const { return static_cast<int>(jump_idx.size()) - 1; }
    // tau_r for r in [start_level - 1, start_level + jumps() - 1].
    long tau(int r) const;
    double tau_time(int r) const { return spec.time(tau(r)); }
    bool tau_truncated(int r) const;
    // Highest interface with an untruncated jump, or start_level - 1.
    int top_untruncated() const;
};

// Southwest dual path in the dual environment, descending by prefix argmax:
//   tau*_{r} = argmax_{s <= tau*_{r+1}} { h_r(s) - X_{r+1}(s) },
// from the base tau*_m = t at start (m, t). The integrand has concave
// interior vertices (one inside interval j iff v_{r+1}[j] == 0 and the
// vertex value beats the left grid value), so maximizers may sit strictly
// between grid columns. Positions are stored as slots:
//   grid column j          -> slot 2j,
//   interior vertex in (j, j+1) -> slot 2j + 1,
// which orders every comparison against grid times exactly; `time` carries
// the piecewise-linear vertex time for reporting.
struct DualGeodesic {
    GridSpec spec;
    int start_level = 0;
    long start_idx = 0;
    double theta = 1.0;
    Side side = Side::Left;
    std::vector<long> slot;      // slot[0] = 2*start_idx
    std::vector<double> time;    // time[0] = start time
    std::vector<bool> truncated;

    int jumps() const { return static_cast<int>(slot.size()) - 1; }
    // tau*_r for r in [start_level - jumps(), start_level].
    long slot_at(int r) const;
    double time_at(int r) const;
    bool slot_truncated(int r) const;
};

// Sequential-argmax construction from (m, t(js)). Needs stack slices
// m+1 .. stack.hi (h lines) and field levels m .. stack.hi-1; produces jumps
// for interfaces m .. stack.hi-1 (or max_jumps of them).
SemiInfGeodesic busemann_geodesic(const Field& field, const BusemannStack& stack,
                                  int m, long js, Side side, int max_jumps = -1);

// Least-squares slope of jump time vs interface index over untruncated
// jumps; requires at least `min_jumps` of them (direction estimates are
// meaningless on short stubs).
double geodesic_direction(const SemiInfGeodesic& g, int min_jumps = 20);

// Start-time monotonicity on one stack: two geodesics from (m, js1) and
// (m, js2), js1 <= js2, same side, must satisfy tau1_r <= tau2_r at every
// common interface. Deterministic (nested argmax windows over one integrand).
// value = worst violation in columns, threshold 0.
CheckReport geodesic_monotonicity_check(const Field& field, const BusemannStack& stack,
                                        int m, long js1, long js2, Side side);

// Direction monotonicity via the coupled finite-n proxies: point-to-point
// maximizing paths from (m, js) to the terminal rays (n, n*gamma) and
// (n, n*theta), gamma < theta, same side, must have coordinatewise-ordered
// jump columns (paths to farther-right terminals wander farther right).
// value = worst violation in columns, threshold 0.
CheckReport geodesic_monotonicity_check(const Field& field, double gamma, double theta,
                                        int m, long js, int n, Side side);

// Dual construction from (k, t(jt)) descending to stack.lo. Needs the dual
// lines (dual_field(stack) or re-read equivalent), the stack (h and v), and
// start level k in [stack.lo + 1, stack.hi]. Truncation flags mark argmaxes
// that landed on the left window edge.
DualGeodesic dual_geodesic(const Field& xfield, const BusemannStack& stack,
                           int k, long jt, Side side, int max_jumps = -1);

// Strong-crossing implications between a forward geodesic from (m, s) and a
// dual from (m+1, t), s <= t, in slot arithmetic:
//   g Right / d Left:   (i) tauR <  t  =>  tauR < tau*        (first jumps)
//                      (ii) t  <= tauR =>  tau* <= s
//   g Left  / d Right: (iii) tauL <= t  =>  tauL <= tau*
//                       (iv) t  <  tauL =>  tau* <  s
// value = violation size in slots, threshold 0; replicas whose first jumps
// are window-truncated are excluded, not failed.
CheckReport crossing_check(const SemiInfGeodesic& g, const DualGeodesic& d);

struct CoalescenceResult {
    bool coalesced = false;
    bool window_limited = false;
    int level = 0;  // first interface from which the jump sequences agree
};

// First interface r >= max of the start levels at which the two jump
// sequences agree (they then agree onward: equal windows, one integrand).
// Window-limited when either path truncates before its top.
CoalescenceResult coalescence_experiment(const Field& field, const BusemannStack& stack,
                                         int m1, long js1, int m2, long js2, Side side);

// Columns j < npts-1 with f_j == RM_j (suffix max, bit equality) whose
// strictly-later suffix max is within epsilon: the near-ties where argmax
// uniqueness is at stake on this window.
std::vector<long> near_tie_scan(const GridFunction& f, double epsilon);

struct MidpointCurve {
    std::vector<int> n;
    std::vector<double> prob;
};

// For each n in n_values: empirical probability over replicas that the
// point-to-point maximizing path (-n, -n*eta) -> (n, n*theta) passes within
// one grid column of (m, t(jt0)). Replica environments come from
// seed -> replica-tag streams; rays snap to the nearest grid column.
MidpointCurve midpoint_experiment(const GridSpec& spec, uint64_t seed, double theta,
                                  double eta, int m, long jt0,
                                  const std::vector<int>& n_values, int replicas,
                                  Side side = Side::Left);
// Template-field convenience: spec and seed from the field, n = 1..n_max.
MidpointCurve midpoint_experiment(const BrownianField& field, double theta, double eta,
                                  int m, long jt0, int n_max, int replicas,
                                  Side side = Side::Left);

// Identity batteries for one constructed geodesic (grid-mode stacks).
// v-vanishing: v_{r+1}(tau_r) == 0 bit-exactly at untruncated jumps.
CheckReport geodesic_v_vanishing_check(const BusemannStack& stack, const SemiInfGeodesic& g);
// Path energy between the start and each untruncated (r+1, tau_r) equals the
// profile telescope sum_k [h_k(tau_{k-1}, tau_k) + v_{k+1}(tau_k)] + last leg.
CheckReport geodesic_energy_check(const Field& field, const BusemannStack& stack,
                                  const SemiInfGeodesic& g, double tol = 1e-9);
// The jump times maximize the boundary-penalized point-to-line problem at the
// top interface: value match within tol and jump-vector match per side.
CheckReport geodesic_p2l_check(const Field& field, const BusemannStack& stack,
                               const SemiInfGeodesic& g, double tol = 1e-9);

// Window sizing for K levels in direction theta: t_max >= 2*theta*K and a
// left margin t_min <= -4 sqrt(theta * window length) for the dual descents,
// both snapped outward to the step.
GridSpec recommended_window(double theta, int levels, double step);

// CSV: header "level,jump_time,truncated", one row per stored entry (the
// base row carries the start). Dual paths write interpolated vertex times.
void write_geodesic_csv(const std::string& path, const SemiInfGeodesic& g);
void write_geodesic_csv(const std::string& path, const DualGeodesic& d);

}  // namespace blpp
