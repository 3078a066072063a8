#pragma once

#include <blpp/check.hpp>
#include <blpp/envgen.hpp>

#include <vector>

namespace blpp {

// Tie-breaking rule for maximizing paths / argmaxes. Left = jump times as
// small as possible (prefer staying low late / leftmost argmax), Right = the
// coordinatewise-maximal counterpart. Ties trigger only on exact float
// equality, which for sampled environments means constructed fixtures.
enum class Side { Left, Right };

// Monotone staircase path from (lo_level, start_idx) to (hi_level, end_idx).
// jump_idx[r - lo_level] is the grid column where the path leaves level r;
// the column sequence is nondecreasing and bounded by [start_idx, end_idx].
struct PassagePath {
    int lo_level = 0;
    int hi_level = 0;
    long start_idx = 0;
    long end_idx = 0;
    std::vector<long> jump_idx;

    bool valid() const;
    // Level r occupies columns [enter_idx(r), leave_idx(r)].
    long enter_idx(int level) const;
    long leave_idx(int level) const;
};

// Sum of per-step increments in path order (levels ascending, columns
// ascending within a level). This association matches the DP recursion, so
// energy(f, backtrack(...)) reproduces the table value bit-for-bit.
double energy(const Field& f, const PassagePath& p);

// Dynamic program for last-passage values from (lo_level, start_idx):
//   row(lo)[start] = 0,  row(r)[start] = 0,
//   row(r)[j] = max(row(r)[j-1] + inc_r(j), row(r-1)[j]).
// Cell (r, j) holds the best energy of a staircase from the start to (r, j).
struct LppTable {
    int lo_level = 0;
    int hi_level = 0;
    long start_idx = 0;
    long end_idx = 0;
    std::vector<std::vector<double>> rows;  // rows[r - lo][j - start_idx]

    long cols() const { return end_idx - start_idx + 1; }
    double value(int level, long j) const { return rows[level - lo_level][j - start_idx]; }
};

LppTable last_passage(const Field& f, int m, long start_idx, int n, long end_idx);

// Single value L_{(m, t(js)), (n, t(jt))}.
double last_passage_value(const Field& f, int m, long js, int n, long jt);

// Maximizing path to (hi_level, end_col). Side::Left prefers the horizontal
// predecessor on exact ties (coordinatewise-minimal jump times), Side::Right
// the vertical one.
PassagePath backtrack(const Field& f, const LppTable& table, long end_col, Side side);

// Point-to-line passage: maximize over terminal columns j of
//   table(hi_level, j) - boundary[j],
// boundary given on the full grid (empty = zero boundary). Returns the
// maximizing column (ties broken per `side`), the value, and the path.
struct PointToLine {
    double value = 0.0;
    long terminal_idx = 0;
    PassagePath path;
};
PointToLine point_to_line(const Field& f, int m, long js, int n, long jt_max,
                          const std::vector<double>& boundary, Side side);

// Exhaustive maximum over all nondecreasing jump tuples, accumulating
// increments in the same order as energy(). Throws std::invalid_argument when
// the tuple count exceeds `max_tuples` (DP oracle for small cases only).
double last_passage_enumerated(const Field& f, int m, long js, int n, long jt,
                               long max_tuples = 20'000'000);

// Deterministic paths-crossing bounds for grid columns js < jt < jT < ju and
// levels m <= n:
//   B_m(s,t) <= L_{(m,s),(n,u)} - L_{(m,t),(n,u)} <= L_{(m,s),(n,T)} - L_{(m,t),(n,T)}
// plus, when m < n, the level-increment analogue for js < jt < ju:
//   0 <= L_{(m,s),(n,t)} - L_{(m+1,s),(n,t)} <= L_{(m,s),(n,u)} - L_{(m+1,s),(n,u)}.
// `value` reports the worst violation (positive = broken), threshold `tol`.
CheckReport crossing_inequalities(const Field& f, int m, int n, long js, long jt,
                                  long jT, long ju, double tol = 1e-9);

}  // namespace blpp
