#include <blpp/lpp.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blpp {

bool PassagePath::valid() const {
    if (hi_level < lo_level || end_idx < start_idx) return false;
    if (static_cast<long>(jump_idx.size()) != hi_level - lo_level) return false;
    long prev = start_idx;
    for (long j : jump_idx) {
        if (j < prev || j > end_idx) return false;
        prev = j;
    }
    return true;
}

long PassagePath::enter_idx(int level) const {
    return level == lo_level ? start_idx : jump_idx[level - lo_level - 1];
}

long PassagePath::leave_idx(int level) const {
    return level == hi_level ? end_idx : jump_idx[level - lo_level];
}

double energy(const Field& f, const PassagePath& p) {
    double sum = 0.0;
    for (int r = p.lo_level; r <= p.hi_level; ++r) {
        const std::vector<double>& line = f.line(r);
        long a = p.enter_idx(r), b = p.leave_idx(r);
        for (long k = a; k < b; ++k) sum += line[k + 1] - line[k];
    }
    return sum;
}

LppTable last_passage(const Field& f, int m, long start_idx, int n, long end_idx) {
    if (n < m) throw std::invalid_argument("last_passage: levels out of order");
    if (end_idx < start_idx) throw std::invalid_argument("last_passage: columns out of order");
    if (!f.has_level(m) || !f.has_level(n))
        throw std::invalid_argument("last_passage: field does not cover the levels");
    if (!f.spec.contains_index(start_idx) || !f.spec.contains_index(end_idx))
        throw std::invalid_argument("last_passage: columns outside grid");

    LppTable t;
    t.lo_level = m;
    t.hi_level = n;
    t.start_idx = start_idx;
    t.end_idx = end_idx;
    const long c = t.cols();
    t.rows.assign(n - m + 1, std::vector<double>(c));

    {
        const std::vector<double>& line = f.line(m);
        std::vector<double>& row = t.rows[0];
        row[0] = 0.0;
        for (long j = 1; j < c; ++j)
            row[j] = row[j - 1] + (line[start_idx + j] - line[start_idx + j - 1]);
    }
    for (int r = m + 1; r <= n; ++r) {
        const std::vector<double>& line = f.line(r);
        const std::vector<double>& below = t.rows[r - m - 1];
        std::vector<double>& row = t.rows[r - m];
        row[0] = below[0];
        for (long j = 1; j < c; ++j) {
            double inc = line[start_idx + j] - line[start_idx + j - 1];
            row[j] = std::max(row[j - 1] + inc, below[j]);
        }
    }
    return t;
}

double last_passage_value(const Field& f, int m, long js, int n, long jt) {
    return last_passage(f, m, js, n, jt).value(n, jt);
}

PassagePath backtrack(const Field& f, const LppTable& table, long end_col, Side side) {
    if (end_col < table.start_idx || end_col > table.end_idx)
        throw std::invalid_argument("backtrack: end column outside table");
    PassagePath p;
    p.lo_level = table.lo_level;
    p.hi_level = table.hi_level;
    p.start_idx = table.start_idx;
    p.end_idx = end_col;
    p.jump_idx.assign(table.hi_level - table.lo_level, table.start_idx);

    int r = table.hi_level;
    long c = end_col;
    while (r > table.lo_level || c > table.start_idx) {
        bool can_h = c > table.start_idx;
        bool can_v = r > table.lo_level;
        bool go_v;
        if (!can_v) {
            go_v = false;
        } else if (!can_h) {
            go_v = true;
        } else {
            const std::vector<double>& line = f.line(r);
            double inc = line[c] - line[c - 1];
            double here = table.value(r, c);
            bool h_ok = table.value(r, c - 1) + inc == here;
            bool v_ok = table.value(r - 1, c) == here;
            // Both hold on exact ties; Side::Left keeps jumps early by
            // walking horizontally first, Side::Right jumps as late as it can.
            if (h_ok && v_ok) go_v = (side == Side::Right);
            else go_v = v_ok;
        }
        if (go_v) {
            p.jump_idx[r - 1 - table.lo_level] = c;
            --r;
        } else {
            --c;
        }
    }
    return p;
}

PointToLine point_to_line(const Field& f, int m, long js, int n, long jt_max,
                          const std::vector<double>& boundary, Side side) {
    if (!boundary.empty() && static_cast<long>(boundary.size()) != f.spec.npts)
        throw std::invalid_argument("point_to_line: boundary not on the field grid");
    LppTable t = last_passage(f, m, js, n, jt_max);
    long best = t.start_idx;
    double bestv = t.value(n, t.start_idx) - (boundary.empty() ? 0.0 : boundary[t.start_idx]);
    for (long j = t.start_idx + 1; j <= t.end_idx; ++j) {
        double v = t.value(n, j) - (boundary.empty() ? 0.0 : boundary[j]);
        if (v > bestv || (v == bestv && side == Side::Right)) {
            bestv = v;
            best = j;
        }
    }
    PointToLine out;
    out.value = bestv;
    out.terminal_idx = best;
    out.path = backtrack(f, t, best, side);
    return out;
}

namespace {

void enumerate_rec(const Field& f, int m, int n, long js, long jt, int r, long lo,
                   double partial, long carry_col, double& best) {
    // partial = energy of the path truncated at (r, lo): levels m..r-1 done,
    // level r entered at column `lo`, accumulated through column `carry_col`.
    const std::vector<double>& line = f.line(r);
    if (r == n) {
        double s = partial;
        for (long k = carry_col; k < jt; ++k) s += line[k + 1] - line[k];
        best = std::max(best, s);
        return;
    }
    // Leave level r at column j, for every j in [lo, jt].
    double s = partial;
    long k = carry_col;
    for (long j = lo; j <= jt; ++j) {
        for (; k < j; ++k) s += line[k + 1] - line[k];
        enumerate_rec(f, m, n, js, jt, r + 1, j, s, j, best);
    }
}

double tuple_count(long cols, int jumps) {
    // C(cols + jumps - 1, jumps), saturating.
    double c = 1.0;
    for (int i = 1; i <= jumps; ++i) c *= static_cast<double>(cols - 1 + i) / i;
    return c;
}

}  // namespace

double last_passage_enumerated(const Field& f, int m, long js, int n, long jt,
                               long max_tuples) {
    if (n < m || jt < js) throw std::invalid_argument("last_passage_enumerated: bad order");
    if (tuple_count(jt - js + 1, n - m) > static_cast<double>(max_tuples))
        throw std::invalid_argument("last_passage_enumerated: case too large");
    double best = -HUGE_VAL;
    enumerate_rec(f, m, n, js, jt, m, js, 0.0, js, best);
    return best;
}

CheckReport crossing_inequalities(const Field& f, int m, int n, long js, long jt,
                                  long jT, long ju, double tol) {
    if (!(js < jt && jt < jT && jT < ju) || m > n)
        throw std::invalid_argument("crossing_inequalities: need js < jt < jT < ju, m <= n");

    double worst = 0.0;
    // Horizontal chain: B_m(s,t) <= L(m,s -> n,u) - L(m,t -> n,u)
    //                           <= L(m,s -> n,T) - L(m,t -> n,T).
    LppTable from_s = last_passage(f, m, js, n, ju);
    LppTable from_t = last_passage(f, m, jt, n, ju);
    double bm_st = f.line(m)[jt] - f.line(m)[js];
    double du = from_s.value(n, ju) - from_t.value(n, ju);
    double dT = from_s.value(n, jT) - from_t.value(n, jT);
    worst = std::max(worst, bm_st - du);
    worst = std::max(worst, du - dT);

    // Vertical chain: 0 <= L(m,s -> n,t) - L(m+1,s -> n,t), nondecreasing in
    // the terminal time.
    if (m < n) {
        LppTable hi = last_passage(f, m + 1, js, n, ju);
        double dt = from_s.value(n, jt) - hi.value(n, jt);
        double duv = from_s.value(n, ju) - hi.value(n, ju);
        worst = std::max(worst, 0.0 - dt);
        worst = std::max(worst, dt - duv);
    }
    return make_check("crossing_inequalities", worst, tol, 1, 0);
}

}  // namespace blpp
