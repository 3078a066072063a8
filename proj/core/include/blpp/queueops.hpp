#pragma once

#include <blpp/check.hpp>
#include <blpp/grid.hpp>
#include <blpp/rng.hpp>

#include <vector>

namespace blpp {

// How interval suprema of the difference process are modeled.
// Grid:   M_k = max at the interval endpoints. Exact for the piecewise-linear
//         path semantics (structural identities, geodesics, inversion).
// Bridge: M_k drawn from the exact law of the maximum of a variance-rate-2
//         Brownian bridge between the endpoint values,
//         M = (a + b + sqrt((a - b)^2 - 4*step*ln U)) / 2.
//         Makes the output laws match the continuum ones (distribution
//         experiments) at the cost of extra latent randomness.
enum class SupMode { Grid, Bridge };

// A pair of inputs to the forward maps: z the drifted ("arrivals-side") line,
// b the driftless ("service-side") line, both anchored to 0 at the grid
// anchor. The infinite suprema of the continuum definitions are truncated at
// the window edges; callers watch the attain indices for truncation.
struct QueuePair {
    GridFunction z, b;
};

// Advisory window-length check: the net decrease of b - z across the window
// should exceed 5 sample standard deviations of its endpoint difference
// (estimated from the per-step increments). Returns false when the window is
// likely too short for the drift gap; never throws.
bool drift_proxy_ok(const QueuePair& p);

struct QueueOutput {
    std::vector<double> q;     // queue profile, >= 0, zero at the scanned-from edge
    std::vector<double> d;     // drifted output line (anchored at the grid anchor)
    std::vector<double> r;     // driftless output line
    std::vector<double> rm;    // running max of the difference process (exact copies)
    std::vector<long> attain;  // index of the interval realizing each supremum
    bool reverse = false;
};

// Forward maps: Q(z,b)(t) = sup_{s >= t} {b(t,s) - z(t,s)},
// d = z + Q(0) - Q(t), r = b + Q(t) - Q(0), with 0 the grid anchor.
QueueOutput queue_apply(const GridSpec& g, const std::vector<double>& z,
                        const std::vector<double>& b, SupMode mode = SupMode::Grid,
                        Rng* rng = nullptr);

// Reverse-time maps: Qrev(y,c)(t) = sup_{s <= t} {c(s,t) - y(s,t)},
// d = y + Qrev(t) - Qrev(0), r = c + Qrev(0) - Qrev(t).
QueueOutput rqueue_apply(const GridSpec& g, const std::vector<double>& y,
                         const std::vector<double>& c, SupMode mode = SupMode::Grid,
                         Rng* rng = nullptr);

// Named single-output wrappers on QueuePair (grid mode).
GridFunction queue_Q(const QueuePair& p);
GridFunction queue_D(const QueuePair& p);
GridFunction queue_R(const QueuePair& p);
GridFunction rqueue_Q(const QueuePair& p);
GridFunction rqueue_D(const QueuePair& p);
GridFunction rqueue_R(const QueuePair& p);

// True when every supremum for columns in [lo, hi] is attained strictly away
// from the far window edge (no truncation could have bitten in that range).
bool attained_interior(const QueueOutput& out, long lo, long hi);

// Round-trip check: forward maps of (z, b), then reverse maps of the outputs,
// compared with (z, b) and q on columns [lo, hi] (lo > hi selects the middle
// half). The reverse scan sees the function between grid points: the interior
// local maxima of y - c (one in interval j whenever xhat_j > rm_{j+1}, value
// w* = (y-c)_{j+1} + q_{j+1}) join the prefix scan. A replica whose window
// truncates the needed argmaxes is excluded and reported, not failed.
CheckReport invert_check(const QueuePair& p, long lo = 1, long hi = 0, double tol = 1e-9);

// Identity inf_{s >= t} (2F(s) - f(s)) == F(t) with F the running max from
// the left window edge, evaluated on the piecewise-linear path (the suffix
// min includes the interior crossing vertices of 2F - f). Holds bit-exactly
// wherever f re-attains the level F(t) inside the window, i.e. wherever the
// running max from the right is >= F(t); other columns only assert the >=
// direction and are counted as truncation-limited.
CheckReport pitman_check(const GridFunction& f, long jt);

// pitman_check swept over every grid column; value = worst deviation.
CheckReport pitman_sweep(const GridFunction& f);

}  // namespace blpp
