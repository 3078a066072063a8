#include "blpp/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace blpp {

namespace {

size_t idx(long j) { return static_cast<size_t>(j); }

}  // namespace

long SemiInfGeodesic::tau(int r) const {
  const int k = r - start_level + 1;
  if (k < 0 || k >= static_cast<int>(jump_idx.size())) {
    throw std::out_of_range("SemiInfGeodesic::tau: interface outside stored range");
  }
  return jump_idx[static_cast<size_t>(k)];
}

bool SemiInfGeodesic::tau_truncated(int r) const {
  const int k = r - start_level + 1;
  if (k < 0 || k >= static_cast<int>(truncated.size())) {
    throw std::out_of_range("SemiInfGeodesic::tau_truncated: interface outside stored range");
  }
  return truncated[static_cast<size_t>(k)];
}

int SemiInfGeodesic::top_untruncated() const {
  int top = start_level - 1;
  for (int k = 1; k < static_cast<int>(jump_idx.size()); ++k) {
    if (truncated[static_cast<size_t>(k)]) break;
    top = start_level + k - 1;
  }
  return top;
}

long DualGeodesic::slot_at(int r) const {
  const int k = start_level - r;
  if (k < 0 || k >= static_cast<int>(slot.size())) {
    throw std::out_of_range("DualGeodesic::slot_at: interface outside stored range");
  }
  return slot[static_cast<size_t>(k)];
}

double DualGeodesic::time_at(int r) const {
  const int k = start_level - r;
  if (k < 0 || k >= static_cast<int>(time.size())) {
    throw std::out_of_range("DualGeodesic::time_at: interface outside stored range");
  }
  return time[static_cast<size_t>(k)];
}

bool DualGeodesic::slot_truncated(int r) const {
  const int k = start_level - r;
  if (k < 0 || k >= static_cast<int>(truncated.size())) {
    throw std::out_of_range("DualGeodesic::slot_truncated: interface outside stored range");
  }
  return truncated[static_cast<size_t>(k)];
}

SemiInfGeodesic busemann_geodesic(const Field& field, const BusemannStack& stack,
                                  int m, long js, Side side, int max_jumps) {
  if (!(field.spec == stack.spec)) {
    throw std::invalid_argument("busemann_geodesic: field and stack grids differ");
  }
  if (!field.spec.contains_index(js)) {
    throw std::out_of_range("busemann_geodesic: start outside window");
  }
  if (m + 1 < stack.lo || m >= stack.hi) {
    throw std::invalid_argument("busemann_geodesic: start level needs stack slices m+1..hi");
  }
  const long npts = field.spec.npts;
  SemiInfGeodesic g;
  g.spec = field.spec;
  g.start_level = m;
  g.start_idx = js;
  g.theta = stack.theta;
  g.side = side;
  g.jump_idx = {js};
  g.truncated = {false};

  int count = stack.hi - m;
  if (max_jumps >= 0) count = std::min(count, max_jumps);
  long cur = js;
  for (int r = m; r < m + count; ++r) {
    const auto& b = field.line(r);
    const auto& h = stack.slice(r + 1).h;
    long best = cur;
    double bestv = b[idx(cur)] - h[cur];
    for (long j = cur + 1; j < npts; ++j) {
      const double val = b[idx(j)] - h[j];
      if (val > bestv || (val == bestv && side == Side::Right)) {
        bestv = val;
        best = j;
      }
    }
    g.jump_idx.push_back(best);
    g.truncated.push_back(best == npts - 1);
    cur = best;
  }
  return g;
}

double geodesic_direction(const SemiInfGeodesic& g, int min_jumps) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long n = 0;
  for (int k = 1; k < static_cast<int>(g.jump_idx.size()); ++k) {
    if (g.truncated[static_cast<size_t>(k)]) continue;
    const double x = static_cast<double>(g.start_level + k - 1);
    const double y = g.spec.time(g.jump_idx[static_cast<size_t>(k)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < min_jumps) {
    throw std::invalid_argument("geodesic_direction: too few untruncated jumps");
  }
  const double den = static_cast<double>(n) * sxx - sx * sx;
  return (static_cast<double>(n) * sxy - sx * sy) / den;
}

CheckReport geodesic_monotonicity_check(const Field& field, const BusemannStack& stack,
                                        int m, long js1, long js2, Side side) {
  if (js1 > js2) throw std::invalid_argument("geodesic_monotonicity_check: need js1 <= js2");
  const SemiInfGeodesic g1 = busemann_geodesic(field, stack, m, js1, side);
  const SemiInfGeodesic g2 = busemann_geodesic(field, stack, m, js2, side);
  double worst = 0.0;
  long used = 0;
  for (int k = 1; k < static_cast<int>(g1.jump_idx.size()); ++k) {
    const long a = g1.jump_idx[static_cast<size_t>(k)];
    const long b = g2.jump_idx[static_cast<size_t>(k)];
    worst = std::max(worst, static_cast<double>(a - b));
    ++used;
  }
  return make_check("geodesic-monotone-start", worst, 0.0, used);
}

CheckReport geodesic_monotonicity_check(const Field& field, double gamma, double theta,
                                        int m, long js, int n, Side side) {
  if (!(gamma > 0.0) || !(gamma < theta)) {
    throw std::invalid_argument("geodesic_monotonicity_check: need 0 < gamma < theta");
  }
  const GridSpec& spec = field.spec;
  const long jg = spec.idx0 + static_cast<long>(std::llround(static_cast<double>(n) * gamma / spec.step));
  const long jt = spec.idx0 + static_cast<long>(std::llround(static_cast<double>(n) * theta / spec.step));
  if (!spec.contains_index(jg) || !spec.contains_index(jt)) {
    throw std::out_of_range("geodesic_monotonicity_check: terminal ray outside window");
  }
  if (jg >= jt) {
    throw std::invalid_argument("geodesic_monotonicity_check: rays collapse on this grid");
  }
  if (js > jg) throw std::invalid_argument("geodesic_monotonicity_check: start right of near ray");
  const LppTable table = last_passage(field, m, js, n, jt);
  const PassagePath near = backtrack(field, table, jg, side);
  const PassagePath far = backtrack(field, table, jt, side);
  double worst = 0.0;
  long used = 0;
  for (size_t k = 0; k < near.jump_idx.size(); ++k) {
    worst = std::max(worst, static_cast<double>(near.jump_idx[k] - far.jump_idx[k]));
    ++used;
  }
  return make_check("geodesic-monotone-direction", worst, 0.0, used);
}

DualGeodesic dual_geodesic(const Field& xfield, const BusemannStack& stack,
                           int k, long jt, Side side, int max_jumps) {
  if (!(xfield.spec == stack.spec)) {
    throw std::invalid_argument("dual_geodesic: dual field and stack grids differ");
  }
  if (!stack.spec.contains_index(jt)) {
    throw std::out_of_range("dual_geodesic: start outside window");
  }
  if (k <= stack.lo || k > stack.hi) {
    throw std::invalid_argument("dual_geodesic: start level needs stack slices lo..k");
  }
  DualGeodesic d;
  d.spec = stack.spec;
  d.start_level = k;
  d.start_idx = jt;
  d.theta = stack.theta;
  d.side = side;
  d.slot = {2 * jt};
  d.time = {stack.spec.time(jt)};
  d.truncated = {false};

  int count = k - stack.lo;
  if (max_jumps >= 0) count = std::min(count, max_jumps);
  long bound_slot = 2 * jt;
  double bound_time = stack.spec.time(jt);
  const double step = stack.spec.step;
  for (int r = k - 1; r >= k - count; --r) {
    const auto& hr = stack.slice(r).h;       // h_r
    const auto& x1 = xfield.line(r + 1);     // X_{r+1}
    const auto& v1 = stack.slice(r + 1).v;   // v_{r+1}
    const long jhi = bound_slot / 2;         // last interval index that can matter

    bool have = false;
    double bestv = 0.0, best_time = 0.0;
    long best_slot = 0;
    auto consider = [&](double val, long slot, double t) {
      if (!have || val > bestv || (val == bestv && side == Side::Right)) {
        have = true;
        bestv = val;
        best_slot = slot;
        best_time = t;
      }
    };

    double w_j = hr[0] - x1[idx(0)];
    for (long j = 0; j <= jhi; ++j) {
      if (2 * j <= bound_slot) consider(w_j, 2 * j, stack.spec.time(j));
      if (j + 1 >= stack.spec.npts) break;
      const double w_next = hr[j + 1] - x1[idx(j + 1)];
      if (2 * j + 1 <= bound_slot) {
        // Interior vertex of h_r - X_{r+1} inside (j, j+1): present iff the
        // difference line attains its suffix max at j (v == 0) and the vertex
        // value w* = W_{j+1} + v_{j+1} strictly beats the left grid value.
        if (v1[j] == 0.0) {
          const double wstar = w_next + v1[j + 1];
          if (wstar > w_j) {
            const double gap = wstar - w_j;
            const double ratio = gap / (gap + v1[j + 1]);
            if (ratio < 1.0) {
              double t = stack.spec.time(j) + step * ratio;
              // A vertex sharing the interval of a vertex bound is capped at
              // the bound time (the continuum argmax cannot sit right of it).
              if (2 * j + 1 == bound_slot && t > bound_time) t = bound_time;
              consider(wstar, 2 * j + 1, t);
            }
          }
        }
      }
      w_j = w_next;
    }
    d.slot.push_back(best_slot);
    d.time.push_back(best_time);
    d.truncated.push_back(best_slot == 0);
    bound_slot = best_slot;
    bound_time = best_time;
  }
  return d;
}

CheckReport crossing_check(const SemiInfGeodesic& g, const DualGeodesic& d) {
  if (d.start_level != g.start_level + 1) {
    throw std::invalid_argument("crossing_check: dual must start one level above");
  }
  if (g.theta != d.theta || !(g.spec == d.spec)) {
    throw std::invalid_argument("crossing_check: paths built in different settings");
  }
  if (g.start_idx > d.start_idx) {
    throw std::invalid_argument("crossing_check: need forward start weakly left of dual start");
  }
  if (g.jumps() < 1 || d.jumps() < 1) {
    throw std::invalid_argument("crossing_check: both paths need their first jump");
  }
  const long s = 2 * g.start_idx;
  const long t = 2 * d.start_idx;
  const long tau = 2 * g.jump_idx[1];
  const long dstar = d.slot[1];

  if (g.truncated[1] || d.truncated[1]) {
    CheckReport r = make_check("geodesic-crossing", 0.0, 0.0, 0, 1, "window-limited");
    return r;
  }

  double worst = 0.0;
  long used = 0;
  if (g.side == Side::Right && d.side == Side::Left) {
    if (tau < t) {  // (i) tauR < t  =>  tauR < tau*
      ++used;
      if (tau >= dstar) worst = std::max(worst, static_cast<double>(tau - dstar + 1));
    } else {        // (ii) t <= tauR  =>  tau* <= s
      ++used;
      if (dstar > s) worst = std::max(worst, static_cast<double>(dstar - s));
    }
  } else if (g.side == Side::Left && d.side == Side::Right) {
    if (tau <= t) { // (iii) tauL <= t  =>  tauL <= tau*
      ++used;
      if (tau > dstar) worst = std::max(worst, static_cast<double>(tau - dstar));
    } else {        // (iv) t < tauL  =>  tau* < s
      ++used;
      if (dstar >= s) worst = std::max(worst, static_cast<double>(dstar - s + 1));
    }
  } else {
    throw std::invalid_argument("crossing_check: sides must pair Right/Left or Left/Right");
  }
  return make_check("geodesic-crossing", worst, 0.0, used);
}

CoalescenceResult coalescence_experiment(const Field& field, const BusemannStack& stack,
                                         int m1, long js1, int m2, long js2, Side side) {
  const SemiInfGeodesic g1 = busemann_geodesic(field, stack, m1, js1, side);
  const SemiInfGeodesic g2 = busemann_geodesic(field, stack, m2, js2, side);
  CoalescenceResult res;
  const int lo = std::max(m1, m2);
  const int top = std::min(g1.top_untruncated(), g2.top_untruncated());
  if (top < lo) {
    res.window_limited = true;
    return res;
  }
  int first = top + 1;
  for (int r = top; r >= lo; --r) {
    if (g1.tau(r) != g2.tau(r)) break;
    first = r;
  }
  if (first <= top) {
    res.coalesced = true;
    res.level = first;
  }
  return res;
}

std::vector<long> near_tie_scan(const GridFunction& f, double epsilon) {
  const long n = f.size();
  if (n < 3) throw std::invalid_argument("near_tie_scan: too few points");
  std::vector<double> rm(static_cast<size_t>(n));
  rm[idx(n - 1)] = f[n - 1];
  for (long j = n - 2; j >= 0; --j) rm[idx(j)] = std::max(f[j], rm[idx(j + 1)]);
  std::vector<long> out;
  for (long j = 0; j + 1 < n; ++j) {
    if (f[j] == rm[idx(j)] && rm[idx(j + 1)] >= f[j] - epsilon) out.push_back(j);
  }
  return out;
}

MidpointCurve midpoint_experiment(const GridSpec& spec, uint64_t seed, double theta,
                                  double eta, int m, long jt0,
                                  const std::vector<int>& n_values, int replicas,
                                  Side side) {
  if (!(theta > 0.0) || !(eta > 0.0)) {
    throw std::invalid_argument("midpoint_experiment: directions must be positive");
  }
  if (n_values.empty() || replicas <= 0) {
    throw std::invalid_argument("midpoint_experiment: empty plan");
  }
  int nmax = 0;
  std::vector<long> js(n_values.size()), jt(n_values.size());
  for (size_t i = 0; i < n_values.size(); ++i) {
    const int n = n_values[i];
    if (n < 1) throw std::invalid_argument("midpoint_experiment: n values must be >= 1");
    nmax = std::max(nmax, n);
    const long a = spec.idx0 - static_cast<long>(std::llround(static_cast<double>(n) * eta / spec.step));
    const long b = spec.idx0 + static_cast<long>(std::llround(static_cast<double>(n) * theta / spec.step));
    if (!spec.contains_index(a) || !spec.contains_index(b)) {
      throw std::out_of_range("midpoint_experiment: ray outside window");
    }
    js[i] = a;
    jt[i] = b;
  }
  MidpointCurve curve;
  curve.n = n_values;
  curve.prob.assign(n_values.size(), 0.0);
  const StreamKey root = StreamKey::root(seed).child(tag::kReplica);
  for (int rep = 0; rep < replicas; ++rep) {
    const BrownianField f = sample_field(spec, -nmax, nmax, root.child_signed(rep).state);
    for (size_t i = 0; i < n_values.size(); ++i) {
      const int n = n_values[i];
      if (m < -n || m > n) continue;  // the path never visits level m
      const LppTable table = last_passage(f, -n, js[i], n, jt[i]);
      const PassagePath path = backtrack(f, table, jt[i], side);
      const long enter = path.enter_idx(m);
      const long leave = path.leave_idx(m);
      if (jt0 >= enter - 1 && jt0 <= leave + 1) curve.prob[i] += 1.0;
    }
  }
  for (auto& p : curve.prob) p /= static_cast<double>(replicas);
  return curve;
}

MidpointCurve midpoint_experiment(const BrownianField& field, double theta, double eta,
                                  int m, long jt0, int n_max, int replicas, Side side) {
  std::vector<int> ns;
  for (int n = 1; n <= n_max; ++n) ns.push_back(n);
  return midpoint_experiment(field.spec, field.seed, theta, eta, m, jt0, ns, replicas, side);
}

CheckReport geodesic_v_vanishing_check(const BusemannStack& stack, const SemiInfGeodesic& g) {
  if (stack.mode != SupMode::Grid) {
    throw std::invalid_argument("geodesic_v_vanishing_check: grid-mode stacks only");
  }
  double worst = 0.0;
  long used = 0, excluded = 0;
  for (int k = 1; k < static_cast<int>(g.jump_idx.size()); ++k) {
    if (g.truncated[static_cast<size_t>(k)]) {
      ++excluded;
      continue;
    }
    const int r = g.start_level + k - 1;
    worst = std::max(worst, std::abs(stack.slice(r + 1).v[g.jump_idx[static_cast<size_t>(k)]]));
    ++used;
  }
  return make_check("geodesic-v-vanishing", worst, 0.0, used, excluded);
}

CheckReport geodesic_energy_check(const Field& field, const BusemannStack& stack,
                                  const SemiInfGeodesic& g, double tol) {
  double worst = 0.0;
  long used = 0, excluded = 0;
  const int m = g.start_level;
  for (int k = 1; k < static_cast<int>(g.jump_idx.size()); ++k) {
    if (g.truncated[static_cast<size_t>(k)]) {
      ++excluded;
      continue;
    }
    PassagePath p;
    p.lo_level = m;
    p.hi_level = m + k;
    p.start_idx = g.start_idx;
    p.end_idx = g.jump_idx[static_cast<size_t>(k)];
    p.jump_idx.assign(g.jump_idx.begin() + 1, g.jump_idx.begin() + 1 + k);
    const double e = energy(field, p);

    double tele = 0.0;
    long prev = g.start_idx;
    for (int r = m; r < m + k; ++r) {
      const long cur = g.jump_idx[static_cast<size_t>(r - m + 1)];
      const auto& s = stack.slice(r);
      tele += s.h[cur] - s.h[prev];
      tele += stack.slice(r + 1).v[cur];
      prev = cur;
    }
    worst = std::max(worst, std::abs(e - tele));
    ++used;
  }
  return make_check("geodesic-energy-telescope", worst, tol, used, excluded);
}

CheckReport geodesic_p2l_check(const Field& field, const BusemannStack& stack,
                               const SemiInfGeodesic& g, double tol) {
  if (stack.mode != SupMode::Grid) {
    throw std::invalid_argument("geodesic_p2l_check: grid-mode stacks only");
  }
  int kstar = 0;
  for (int k = 1; k < static_cast<int>(g.jump_idx.size()); ++k) {
    if (g.truncated[static_cast<size_t>(k)]) break;
    kstar = k;
  }
  if (kstar == 0) {
    return make_check("geodesic-point-to-line", 0.0, tol, 0, 1, "window-limited");
  }
  const int m = g.start_level;
  const int n = m + kstar - 1;  // top certified interface
  const auto& boundary = stack.slice(n + 1).h.v;
  const PointToLine p2l =
      point_to_line(field, m, g.start_idx, n, field.spec.npts - 1, boundary, g.side);

  PassagePath p;
  p.lo_level = m;
  p.hi_level = n;
  p.start_idx = g.start_idx;
  p.end_idx = g.jump_idx[static_cast<size_t>(kstar)];
  p.jump_idx.assign(g.jump_idx.begin() + 1, g.jump_idx.begin() + kstar);
  const double val = energy(field, p) - boundary[idx(p.end_idx)];

  long mismatches = 0;
  if (p2l.terminal_idx != p.end_idx) ++mismatches;
  for (size_t i = 0; i < p.jump_idx.size(); ++i) {
    if (p2l.path.jump_idx[i] != p.jump_idx[i]) ++mismatches;
  }
  double value = std::abs(p2l.value - val);
  std::string detail;
  if (mismatches > 0) {
    value = std::max(value, 1.0);
    detail = "maximizing sequences differ";
  }
  return make_check("geodesic-point-to-line", value, tol, kstar, 0, detail);
}

GridSpec recommended_window(double theta, int levels, double step) {
  if (!(theta > 0.0) || levels < 1 || !(step > 0.0)) {
    throw std::invalid_argument("recommended_window: bad parameters");
  }
  const double tmax = 2.0 * theta * static_cast<double>(levels);
  double tmin = -4.0 * std::sqrt(theta * tmax);
  for (int it = 0; it < 4; ++it) tmin = -4.0 * std::sqrt(theta * (tmax - tmin));
  const double hi = std::ceil(tmax / step) * step;
  const double lo = std::floor(tmin / step) * step;
  return GridSpec::make(lo, hi, step);
}

namespace {

void write_geodesic_rows(std::ofstream& out, const std::vector<int>& levels,
                         const std::vector<double>& times, const std::vector<bool>& trunc) {
  out << "level,jump_time,truncated\n";
  for (size_t i = 0; i < times.size(); ++i) {
    out << levels[i] << ',' << format_sig12(times[i]) << ',' << (trunc[i] ? 1 : 0) << '\n';
  }
}

}  // namespace

void write_geodesic_csv(const std::string& path, const SemiInfGeodesic& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_geodesic_csv: cannot open " + path);
  std::vector<int> levels;
  std::vector<double> times;
  for (size_t i = 0; i < g.jump_idx.size(); ++i) {
    levels.push_back(g.start_level + static_cast<int>(i) - 1);
    times.push_back(g.spec.time(g.jump_idx[i]));
  }
  write_geodesic_rows(out, levels, times, g.truncated);
  if (!out) throw std::runtime_error("write_geodesic_csv: write failed for " + path);
}

void write_geodesic_csv(const std::string& path, const DualGeodesic& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_geodesic_csv: cannot open " + path);
  std::vector<int> levels;
  for (size_t i = 0; i < d.slot.size(); ++i) {
    levels.push_back(d.start_level - static_cast<int>(i));
  }
  write_geodesic_rows(out, levels, d.time, d.truncated);
  if (!out) throw std::runtime_error("write_geodesic_csv: write failed for " + path);
}

}  // namespace blpp
