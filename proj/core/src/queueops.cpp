#include <blpp/queueops.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blpp {

namespace {

void require_pair(const QueuePair& p) {
    if (!(p.z.spec == p.b.spec)) throw std::invalid_argument("queue pair: spec mismatch");
    if (p.z.v[p.z.spec.idx0] != 0.0 || p.b.v[p.b.spec.idx0] != 0.0)
        throw std::invalid_argument("queue pair: inputs must vanish at the anchor");
}

std::vector<double> interval_sups(const GridSpec& g, const std::vector<double>& x,
                                  SupMode mode, Rng* rng) {
    const long n = g.npts;
    std::vector<double> m(n - 1);
    if (mode == SupMode::Grid) {
        for (long k = 0; k + 1 < n; ++k) m[k] = std::max(x[k], x[k + 1]);
    } else {
        if (!rng) throw std::invalid_argument("bridge mode needs an rng");
        for (long k = 0; k + 1 < n; ++k) {
            double a = x[k], b = x[k + 1], d = a - b;
            double u = rng->uniform_open01();
            m[k] = 0.5 * (a + b + std::sqrt(d * d - 4.0 * g.step * std::log(u)));
        }
    }
    return m;
}

}  // namespace

bool drift_proxy_ok(const QueuePair& p) {
    require_pair(p);
    const long n = p.z.spec.npts;
    if (n < 3) return false;
    double mean = 0.0;
    for (long k = 0; k + 1 < n; ++k)
        mean += (p.b.v[k + 1] - p.z.v[k + 1]) - (p.b.v[k] - p.z.v[k]);
    double total = mean;  // telescoping net change of b - z
    mean /= static_cast<double>(n - 1);
    double ss = 0.0;
    for (long k = 0; k + 1 < n; ++k) {
        double inc = (p.b.v[k + 1] - p.z.v[k + 1]) - (p.b.v[k] - p.z.v[k]) - mean;
        ss += inc * inc;
    }
    double sd_endpoint = std::sqrt(ss);  // sd(inc) * sqrt(n-1)
    return -total >= 5.0 * sd_endpoint;
}

QueueOutput queue_apply(const GridSpec& g, const std::vector<double>& z,
                        const std::vector<double>& b, SupMode mode, Rng* rng) {
    const long n = g.npts;
    if (static_cast<long>(z.size()) != n || static_cast<long>(b.size()) != n)
        throw std::invalid_argument("queue_apply: size mismatch");
    std::vector<double> x(n);
    for (long j = 0; j < n; ++j) x[j] = b[j] - z[j];
    std::vector<double> m = interval_sups(g, x, mode, rng);

    QueueOutput out;
    out.q.resize(n);
    out.d.resize(n);
    out.r.resize(n);
    out.rm.resize(n);
    out.attain.resize(n);
    double cur = x[n - 1];
    long curk = n - 1;
    out.rm[n - 1] = cur;
    out.attain[n - 1] = curk;
    for (long k = n - 2; k >= 0; --k) {
        if (m[k] >= cur) {  // leftmost interval wins ties
            cur = m[k];
            curk = k;
        }
        out.rm[k] = cur;
        out.attain[k] = curk;
    }
    for (long j = 0; j < n; ++j) out.q[j] = out.rm[j] - x[j];
    const double q0 = out.q[g.idx0];
    for (long j = 0; j < n; ++j) {
        out.d[j] = z[j] + (q0 - out.q[j]);
        out.r[j] = b[j] + (out.q[j] - q0);
    }
    return out;
}

QueueOutput rqueue_apply(const GridSpec& g, const std::vector<double>& y,
                         const std::vector<double>& c, SupMode mode, Rng* rng) {
    const long n = g.npts;
    if (static_cast<long>(y.size()) != n || static_cast<long>(c.size()) != n)
        throw std::invalid_argument("rqueue_apply: size mismatch");
    std::vector<double> w(n);
    for (long j = 0; j < n; ++j) w[j] = y[j] - c[j];
    std::vector<double> m = interval_sups(g, w, mode, rng);

    QueueOutput out;
    out.reverse = true;
    out.q.resize(n);
    out.d.resize(n);
    out.r.resize(n);
    out.rm.resize(n);
    out.attain.resize(n);
    double cur = w[0];
    long curk = 0;
    out.rm[0] = cur;
    out.attain[0] = curk;
    for (long k = 0; k + 1 < n; ++k) {
        if (m[k] > cur) {  // leftmost interval wins ties
            cur = m[k];
            curk = k;
        }
        out.rm[k + 1] = cur;
        out.attain[k + 1] = curk;
    }
    for (long j = 0; j < n; ++j) out.q[j] = out.rm[j] - w[j];
    const double q0 = out.q[g.idx0];
    for (long j = 0; j < n; ++j) {
        out.d[j] = y[j] + (out.q[j] - q0);
        out.r[j] = c[j] + (q0 - out.q[j]);
    }
    return out;
}

namespace {

GridFunction wrap(const GridSpec& g, std::vector<double> v) {
    GridFunction f;
    f.spec = g;
    f.v = std::move(v);
    return f;
}

}  // namespace

GridFunction queue_Q(const QueuePair& p) {
    require_pair(p);
    return wrap(p.z.spec, queue_apply(p.z.spec, p.z.v, p.b.v).q);
}
GridFunction queue_D(const QueuePair& p) {
    require_pair(p);
    return wrap(p.z.spec, queue_apply(p.z.spec, p.z.v, p.b.v).d);
}
GridFunction queue_R(const QueuePair& p) {
    require_pair(p);
    return wrap(p.z.spec, queue_apply(p.z.spec, p.z.v, p.b.v).r);
}
GridFunction rqueue_Q(const QueuePair& p) {
    require_pair(p);
    return wrap(p.z.spec, rqueue_apply(p.z.spec, p.z.v, p.b.v).q);
}
GridFunction rqueue_D(const QueuePair& p) {
    require_pair(p);
    return wrap(p.z.spec, rqueue_apply(p.z.spec, p.z.v, p.b.v).d);
}
GridFunction rqueue_R(const QueuePair& p) {
    require_pair(p);
    return wrap(p.z.spec, rqueue_apply(p.z.spec, p.z.v, p.b.v).r);
}

bool attained_interior(const QueueOutput& out, long lo, long hi) {
    const long n = static_cast<long>(out.attain.size());
    if (lo < 0 || hi >= n || lo > hi) return false;
    // attain is monotone in the scan direction, so one endpoint decides.
    if (out.reverse) return out.attain[lo] >= 1;
    return out.attain[hi] <= n - 3;
}

CheckReport invert_check(const QueuePair& p, long lo, long hi, double tol) {
    require_pair(p);
    const GridSpec& g = p.z.spec;
    const long n = g.npts;
    if (lo > hi) {  // default: middle half of the window
        lo = n / 4;
        hi = (3 * n) / 4;
    }
    if (lo < 0 || hi >= n)
        throw std::invalid_argument("invert_check: columns outside grid");

    QueueOutput fw = queue_apply(g, p.z.v, p.b.v);
    std::vector<double> x(n), w(n);
    for (long j = 0; j < n; ++j) {
        x[j] = p.b.v[j] - p.z.v[j];
        w[j] = fw.d[j] - fw.r[j];
    }

    // Validity: the Pitman attainment for every checked column (and the
    // anchor) needs a prior crossing of the suffix-max level, i.e. prefix max
    // of xhat must dominate at the leftmost relevant column; symmetric
    // truncation guard on the right.
    const long left = std::min(lo, g.idx0);
    const long right = std::max(hi, g.idx0);
    double pm_left = x[0];
    for (long j = 1; j <= left; ++j) pm_left = std::max(pm_left, x[j]);
    bool valid = pm_left >= fw.rm[left] && attained_interior(fw, 0, right);

    // Kink-augmented prefix scan of w = d - r over the piecewise-linear path.
    std::vector<double> qrev(n);
    {
        double cur = w[0];
        qrev[0] = cur - w[0];
        for (long j = 1; j < n; ++j) {
            if (x[j - 1] > fw.rm[j]) cur = std::max(cur, w[j] + fw.q[j]);
            cur = std::max(cur, w[j]);
            qrev[j] = cur - w[j];
        }
    }
    const double q0 = qrev[g.idx0];
    double dev = 0.0;
    for (long j = lo; j <= hi; ++j) {
        double zrec = fw.d[j] + (qrev[j] - q0);
        double brec = fw.r[j] + (q0 - qrev[j]);
        dev = std::max(dev, std::fabs(zrec - p.z.v[j]));
        dev = std::max(dev, std::fabs(brec - p.b.v[j]));
        dev = std::max(dev, std::fabs(qrev[j] - fw.q[j]));
    }

    CheckReport r = make_check("invert_check", dev, tol, 1, 0);
    if (!valid) {
        r.pass = true;  // excluded, not failed
        r.n_used = 0;
        r.n_excluded = 1;
        r.detail = "truncation-limited";
    }
    return r;
}

namespace {

// Core of the Pitman check: prefix max pm of f, then the suffix min of
// 2*pm - f over grid vertices plus the crossing vertices of the running max
// (interval j holds one with value pm[j] whenever f[j+1] > pm[j]).
struct PitmanScan {
    std::vector<double> pm, sm, rm;
};

PitmanScan pitman_scan(const std::vector<double>& f) {
    const long n = static_cast<long>(f.size());
    PitmanScan s;
    s.pm.resize(n);
    s.sm.resize(n);
    s.rm.resize(n);
    double cur = f[0];
    for (long j = 0; j < n; ++j) {
        cur = std::max(cur, f[j]);
        s.pm[j] = cur;
    }
    cur = f[n - 1];
    for (long j = n - 1; j >= 0; --j) {
        cur = std::max(cur, f[j]);
        s.rm[j] = cur;
    }
    double curmin = 2.0 * s.pm[n - 1] - f[n - 1];
    s.sm[n - 1] = curmin;
    for (long j = n - 2; j >= 0; --j) {
        if (f[j + 1] > s.pm[j]) curmin = std::min(curmin, s.pm[j]);
        curmin = std::min(curmin, 2.0 * s.pm[j] - f[j]);
        s.sm[j] = curmin;
    }
    return s;
}

CheckReport pitman_report(const PitmanScan& s, long lo, long hi) {
    double worst = 0.0;
    long used = 0, excluded = 0;
    for (long j = lo; j <= hi; ++j) {
        if (s.rm[j] >= s.pm[j]) {
            ++used;
            worst = std::max(worst, std::fabs(s.sm[j] - s.pm[j]));
        } else {
            ++excluded;
            worst = std::max(worst, s.pm[j] - s.sm[j]);  // >= direction only
        }
    }
    return make_check("pitman_check", worst, 0.0, used, excluded);
}

}  // namespace

CheckReport pitman_check(const GridFunction& f, long jt) {
    if (!f.spec.contains_index(jt)) throw std::invalid_argument("pitman_check: bad column");
    return pitman_report(pitman_scan(f.v), jt, jt);
}

CheckReport pitman_sweep(const GridFunction& f) {
    return pitman_report(pitman_scan(f.v), 0, f.spec.npts - 1);
}

}  // namespace blpp
