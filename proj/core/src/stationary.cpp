#include "blpp/stationary.hpp"

#include "blpp/lpp.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace blpp {

namespace {

size_t idx(long j) { return static_cast<size_t>(j); }

double inc(const GridFunction& f, long ja, long jb) { return f[jb] - f[ja]; }

long snap_ray(const GridSpec& spec, double x) {
  return spec.idx0 + static_cast<long>(std::llround(x / spec.step));
}

long probe_steps(const GridSpec& spec, double probe_len) {
  if (!(probe_len > 0.0)) throw std::invalid_argument("burke probe length must be > 0");
  const long k = static_cast<long>(std::llround(probe_len / spec.step));
  if (k < 1 || std::abs(static_cast<double>(k) * spec.step - probe_len) > 1e-6 * spec.step) {
    throw std::invalid_argument("burke probe length must sit on the grid");
  }
  return k;
}

void require_staircase(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("burke: need at least one time");
  for (size_t i = 1; i < times.size(); ++i) {
    if (times[i] > times[i - 1]) {
      throw std::invalid_argument("burke: times must be nonincreasing in level index");
    }
  }
}

}  // namespace

const GridFunction& StationaryStack::y_line(int m) const {
  if (m < 0 || m > n) throw std::out_of_range("StationaryStack: Y level outside 0..n");
  return Y[static_cast<size_t>(m)];
}

const GridFunction& StationaryStack::q_line(int m) const {
  if (m < 1 || m > n) throw std::out_of_range("StationaryStack: q level outside 1..n");
  return q[static_cast<size_t>(m - 1)];
}

const GridFunction& StationaryStack::w_line(int m) const {
  if (m < 0 || m >= n) throw std::out_of_range("StationaryStack: W level outside 0..n-1");
  return W[static_cast<size_t>(m)];
}

long StationaryStack::certified_lo(int m) const {
  if (m < 0 || m > n) throw std::out_of_range("StationaryStack: level outside 0..n");
  long lo = 0;
  for (int lv = 1; lv <= m; ++lv) lo = std::max(lo, first_certified[static_cast<size_t>(lv - 1)]);
  return lo;
}

StationaryStack build_stationary(const Field& field, double lambda, int n_levels) {
  if (!(lambda > 0.0)) throw std::invalid_argument("build_stationary: lambda must be > 0");
  if (n_levels < 1) throw std::invalid_argument("build_stationary: need at least one level");
  if (!field.has_level(0) || !field.has_level(n_levels)) {
    throw std::invalid_argument("build_stationary: field must cover levels 0..n");
  }
  const GridSpec& spec = field.spec;
  StationaryStack st;
  st.spec = spec;
  st.lambda = lambda;
  st.n = n_levels;

  std::vector<double> y(idx(spec.npts));
  const auto& b0 = field.line(0);
  for (long j = 0; j < spec.npts; ++j) y[idx(j)] = -b0[idx(j)] + lambda * spec.time(j);
  st.Y.emplace_back(spec, y);

  for (int m = 1; m <= n_levels; ++m) {
    QueueOutput out = rqueue_apply(spec, y, field.line(m), SupMode::Grid, nullptr);
    long first = spec.npts;
    for (long j = 0; j < spec.npts; ++j) {
      if (out.attain[idx(j)] >= 1) {
        first = j;
        break;
      }
    }
    st.first_certified.push_back(first);
    st.q.emplace_back(spec, std::move(out.q));
    st.W.emplace_back(spec, std::move(out.r));
    y = std::move(out.d);
    st.Y.emplace_back(spec, y);
  }
  return st;
}

BurkeBlocks burke_blocks(const StationaryStack& stack, const Field& field,
                         const std::vector<double>& times, double probe_len,
                         BurkeProbe probe) {
  require_staircase(times);
  const GridSpec& spec = stack.spec;
  const int k = static_cast<int>(times.size());
  if (stack.n < k) throw std::invalid_argument("burke_blocks: stack shallower than times");
  if (!field.has_level(1) || !field.has_level(k)) {
    throw std::invalid_argument("burke_blocks: field must cover levels 1..k");
  }
  const long jp = probe_steps(spec, probe_len);
  std::vector<long> jt(times.size());
  for (size_t i = 0; i < times.size(); ++i) jt[i] = spec.index_of(times[i]);
  if (jt.front() + jp >= spec.npts || jt.back() - jp < 0) {
    throw std::invalid_argument("burke_blocks: probe increments leave the window");
  }

  BurkeBlocks blk;
  auto push = [&](std::string name, double value) {
    blk.name.push_back(std::move(name));
    blk.value.push_back(value);
  };
  const long j1 = jt[0];
  push("W0_past", inc(stack.w_line(0), j1 - jp, j1));
  push("q1", stack.q_line(1)[j1]);
  if (probe == BurkeProbe::Staircase) {
    push("Y0_future", inc(stack.y_line(0), j1, j1 + jp));
  } else {
    push("Y0_past_control", inc(stack.y_line(0), j1 - jp, j1));
  }
  for (int r = 1; r <= k - 1; ++r) {
    const long ja = jt[idx(r)];      // t_{r+1}
    const long jb = jt[idx(r - 1)];  // t_r
    const std::string rs = std::to_string(r);
    push("W" + rs + "_past", inc(stack.w_line(r), ja - jp, ja));
    push("q" + std::to_string(r + 1), stack.q_line(r + 1)[ja]);
    push("Y" + rs + "_mid", inc(stack.y_line(r), ja, jb));
    const auto& br = field.line(r);
    push("B" + rs + "_future", br[idx(jb + jp)] - br[idx(jb)]);
  }
  const long jk = jt.back();
  push("Y" + std::to_string(k) + "_past", inc(stack.y_line(k), jk - jp, jk));
  const auto& bk = field.line(k);
  push("B" + std::to_string(k) + "_future", bk[idx(jk + jp)] - bk[idx(jk)]);

  blk.certified = stack.certified_lo(k) <= jk - jp;
  return blk;
}

BurkeSample burke_sample(const GridSpec& spec, double lambda,
                         const std::vector<double>& times, int replicas,
                         uint64_t seed, double probe_len, BurkeProbe probe) {
  require_staircase(times);
  if (replicas < 16) throw std::invalid_argument("burke: need at least 16 replicas");
  const int k = static_cast<int>(times.size());
  BurkeSample out;
  const StreamKey reps = StreamKey::root(seed).child(tag::kReplica);
  for (int rep = 0; rep < replicas; ++rep) {
    const BrownianField field = sample_field(spec, 0, k, reps.child_signed(rep).state);
    const StationaryStack stack = build_stationary(field, lambda, k);
    BurkeBlocks blk = burke_blocks(stack, field, times, probe_len, probe);
    if (!blk.certified) {
      ++out.excluded;
      continue;
    }
    if (out.names.empty()) out.names = blk.name;
    out.rows.push_back(std::move(blk.value));
  }
  return out;
}

CheckReport burke_check(const GridSpec& spec, double lambda,
                        const std::vector<double>& times, int replicas,
                        uint64_t seed, double probe_len, BurkeProbe probe) {
  return burke_check(burke_sample(spec, lambda, times, replicas, seed, probe_len, probe));
}

CheckReport burke_check(const BurkeSample& s) {
  const long used = static_cast<long>(s.rows.size());
  const bool staircase = s.names.size() < 3 || s.names[2] == "Y0_future";
  const std::string name = staircase ? "burke-independence" : "burke-overlap-control";
  if (used < 16) return make_check(name, 1.0, 0.0, used, s.excluded, "too few certified replicas");

  const size_t nb = s.names.size();
  std::vector<double> mean(nb, 0.0), sd(nb, 0.0);
  for (const auto& row : s.rows) {
    for (size_t i = 0; i < nb; ++i) mean[i] += row[i];
  }
  for (auto& m : mean) m /= static_cast<double>(used);
  for (const auto& row : s.rows) {
    for (size_t i = 0; i < nb; ++i) {
      const double d = row[i] - mean[i];
      sd[i] += d * d;
    }
  }
  for (auto& v : sd) v = std::sqrt(v / static_cast<double>(used));

  double worst = 0.0;
  std::string worst_pair;
  long pairs = 0;
  for (size_t i = 0; i < nb; ++i) {
    for (size_t j = i + 1; j < nb; ++j) {
      double acc = 0.0;
      for (const auto& row : s.rows) acc += (row[i] - mean[i]) * (row[j] - mean[j]);
      const double rho = acc / (static_cast<double>(used) * sd[i] * sd[j]);
      ++pairs;
      if (std::abs(rho) > worst) {
        worst = std::abs(rho);
        worst_pair = s.names[i] + " vs " + s.names[j];
      }
    }
  }
  const double threshold = 4.0 / std::sqrt(static_cast<double>(used));
  std::ostringstream detail;
  detail << pairs << " pairs, worst " << worst_pair;
  return make_check(name, worst, threshold, used, s.excluded, detail.str());
}

namespace {

// Doubly-centered pairwise-distance matrix (the distance-covariance kernel).
std::vector<double> centered_distances(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<double> a(n * n);
  std::vector<double> rowmean(n, 0.0);
  double grand = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const double d = std::abs(x[i] - x[j]);
      a[i * n + j] = d;
      rowmean[i] += d;
    }
  }
  for (auto& r : rowmean) r /= static_cast<double>(n);
  for (const auto& r : rowmean) grand += r;
  grand /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      a[i * n + j] += grand - rowmean[i] - rowmean[j];
    }
  }
  return a;
}

double dcov2(const std::vector<double>& a, const std::vector<double>& b,
             const std::vector<size_t>& perm, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const size_t pi = perm[i] * n;
    for (size_t j = 0; j < n; ++j) acc += a[i * n + j] * b[pi + perm[j]];
  }
  return acc / static_cast<double>(n * n);
}

}  // namespace

CheckReport burke_dcor_check(const GridSpec& spec, double lambda,
                             const std::vector<double>& times, int replicas,
                             uint64_t seed, double probe_len, BurkeProbe probe,
                             int permutations) {
  return burke_dcor_check(burke_sample(spec, lambda, times, replicas, seed, probe_len, probe),
                          seed, permutations);
}

CheckReport burke_dcor_check(const BurkeSample& s, uint64_t seed, int permutations) {
  if (permutations < 19) throw std::invalid_argument("burke_dcor_check: too few permutations");
  const size_t used = s.rows.size();
  const bool staircase = s.names.size() < 3 || s.names[2] == "Y0_future";
  const std::string name = staircase ? "burke-dcor" : "burke-dcor-control";
  if (used < 64) {
    return make_check(name, 1.0, 0.0, static_cast<long>(used), s.excluded,
                      "too few certified replicas");
  }
  std::vector<double> x(used), y(used);
  for (size_t i = 0; i < used; ++i) {
    x[i] = s.rows[i][1];  // q_1(t_1)
    y[i] = s.rows[i][2];  // Y_0 probe increment
  }
  const std::vector<double> a = centered_distances(x);
  const std::vector<double> b = centered_distances(y);
  std::vector<size_t> id(used);
  std::iota(id.begin(), id.end(), size_t{0});
  const double vx = dcov2(a, a, id, used);
  const double vy = dcov2(b, b, id, used);
  const double denom = std::sqrt(vx * vy);
  const double observed = denom > 0.0 ? std::sqrt(std::max(0.0, dcov2(a, b, id, used)) / denom) : 0.0;

  Rng rng(StreamKey::root(seed).child(tag::kExperiment).child(11));
  std::vector<size_t> perm = id;
  int ge = 0;
  for (int p = 0; p < permutations; ++p) {
    for (size_t i = used - 1; i > 0; --i) {
      const size_t j = static_cast<size_t>(rng.next_u64() % (i + 1));
      std::swap(perm[i], perm[j]);
    }
    const double dc = denom > 0.0
                          ? std::sqrt(std::max(0.0, dcov2(a, b, perm, used)) / denom)
                          : 0.0;
    if (dc >= observed) ++ge;
  }
  const double pvalue = static_cast<double>(1 + ge) / static_cast<double>(permutations + 1);
  const double alpha = 0.01;
  std::ostringstream detail;
  detail << "dcor=" << observed << " p=" << pvalue;
  return make_check(name, alpha - pvalue, 0.0, static_cast<long>(used), s.excluded, detail.str());
}

SandwichGaps sandwich_gaps(const Field& field, double lambda, double delta_hat,
                           double gamma_hat, double s, double t, int n) {
  if (!(lambda > 0.0)) throw std::invalid_argument("sandwich: lambda must be > 0");
  const double inv2 = 1.0 / (lambda * lambda);
  if (!(delta_hat > 0.0) || !(delta_hat < inv2) || !(gamma_hat > inv2)) {
    throw std::invalid_argument("sandwich: need 0 < delta_hat < lambda^-2 < gamma_hat");
  }
  if (!(s < t)) throw std::invalid_argument("sandwich: need s < t");
  if (n < 1) throw std::invalid_argument("sandwich: need n >= 1");
  const GridSpec& spec = field.spec;
  const long js = spec.index_of(s);
  const long jt = spec.index_of(t);
  const long jd = snap_ray(spec, static_cast<double>(n) * delta_hat);
  const long jg = snap_ray(spec, static_cast<double>(n) * gamma_hat);
  if (!spec.contains_index(jd) || !spec.contains_index(jg)) {
    throw std::out_of_range("sandwich: terminal ray outside window");
  }
  if (jt > jd) throw std::invalid_argument("sandwich: need t <= n * delta_hat on the grid");

  SandwichGaps g;
  const StationaryStack stack = build_stationary(field, lambda, n + 1);
  if (stack.certified_lo(n + 1) > js) return g;
  g.certified = true;

  Field wf;
  wf.spec = spec;
  wf.lo = 0;
  for (int m = 0; m <= n; ++m) wf.lines.push_back(stack.w_line(m).v);

  const double lds = last_passage_value(wf, 0, js, n, jd);
  const double ldt = last_passage_value(wf, 0, jt, n, jd);
  const double lgs = last_passage_value(wf, 0, js, n, jg);
  const double lgt = last_passage_value(wf, 0, jt, n, jg);
  const double ld1 = last_passage_value(wf, 1, jt, n, jd);
  const double lg1 = last_passage_value(wf, 1, jt, n, jg);

  const double mid_y = -(stack.y_line(0)[jt] - stack.y_line(0)[js]);
  const double q1t = stack.q_line(1)[jt];
  g.excess_y = std::max({(ldt - lds) - mid_y, mid_y - (lgt - lgs), 0.0});
  g.excess_q = std::max({(ldt - ld1) - q1t, q1t - (lgt - lg1), 0.0});
  return g;
}

int sandwich_holds(const Field& field, double lambda, double delta_hat,
                   double gamma_hat, double s, double t, int n, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("sandwich: tol must be >= 0");
  const SandwichGaps g = sandwich_gaps(field, lambda, delta_hat, gamma_hat, s, t, n);
  if (!g.certified) return -1;
  const double slack = tol + 1e-9;
  return (g.excess_y <= slack && g.excess_q <= slack) ? 1 : 0;
}

CheckReport sandwich_check(const GridSpec& spec, double lambda, double delta_hat,
                           double gamma_hat, double s, double t, int n,
                           int replicas, uint64_t seed, double min_fraction,
                           double tol) {
  if (replicas < 1) throw std::invalid_argument("sandwich_check: need replicas >= 1");
  long bracketed = 0, strict = 0, used = 0, excluded = 0;
  const StreamKey reps = StreamKey::root(seed).child(tag::kReplica);
  for (int rep = 0; rep < replicas; ++rep) {
    const BrownianField field = sample_field(spec, 0, n + 1, reps.child_signed(rep).state);
    const SandwichGaps g = sandwich_gaps(field, lambda, delta_hat, gamma_hat, s, t, n);
    if (!g.certified) {
      ++excluded;
      continue;
    }
    ++used;
    const double worst = std::max(g.excess_y, g.excess_q);
    if (worst <= tol + 1e-9) ++bracketed;
    if (worst <= 1e-9) ++strict;
  }
  const double frac =
      used > 0 ? static_cast<double>(bracketed) / static_cast<double>(used) : 0.0;
  std::ostringstream detail;
  detail << "bracketed " << bracketed << "/" << used << " at tol=" << format_sig12(tol)
         << ", strict " << strict << "/" << used;
  return make_check("sandwich-bracketing", 1.0 - frac, 1.0 - min_fraction, used, excluded,
                    detail.str());
}

void write_stationary(const std::string& dir, const StationaryStack& stack) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream man(fs::path(dir) / "stack.json", std::ios::binary);
  if (!man) throw std::runtime_error("write_stationary: cannot open manifest in " + dir);
  man << "t_min:" << format_sig12(stack.spec.t_min()) << '\n'
      << "t_max:" << format_sig12(stack.spec.t_max()) << '\n'
      << "step:" << format_sig12(stack.spec.step) << '\n'
      << "lambda:" << format_sig12(stack.lambda) << '\n'
      << "levels:" << stack.n << '\n';
  man << "first_certified:";
  for (size_t i = 0; i < stack.first_certified.size(); ++i) {
    if (i) man << ',';
    man << stack.first_certified[i];
  }
  man << '\n';
  for (int m = 0; m <= stack.n; ++m) {
    write_grid_csv((fs::path(dir) / ("Y_" + std::to_string(m) + ".csv")).string(),
                   stack.y_line(m));
  }
  for (int m = 1; m <= stack.n; ++m) {
    write_grid_csv((fs::path(dir) / ("q_" + std::to_string(m) + ".csv")).string(),
                   stack.q_line(m));
  }
  for (int m = 0; m < stack.n; ++m) {
    write_grid_csv((fs::path(dir) / ("W_" + std::to_string(m) + ".csv")).string(),
                   stack.w_line(m));
  }
}

StationaryStack read_stationary(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream man(fs::path(dir) / "stack.json", std::ios::binary);
  if (!man) throw std::runtime_error("read_stationary: cannot open manifest in " + dir);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(man, line)) {
    const auto pos = line.find(':');
    if (pos == std::string::npos) continue;
    kv[line.substr(0, pos)] = line.substr(pos + 1);
  }
  for (const char* want : {"t_min", "t_max", "step", "lambda", "levels", "first_certified"}) {
    if (!kv.count(want)) {
      throw std::runtime_error("read_stationary: manifest missing key " + std::string(want));
    }
  }
  StationaryStack st;
  st.spec = GridSpec::make(std::stod(kv["t_min"]), std::stod(kv["t_max"]), std::stod(kv["step"]));
  st.lambda = std::stod(kv["lambda"]);
  st.n = std::stoi(kv["levels"]);
  {
    std::istringstream fc(kv["first_certified"]);
    std::string item;
    while (std::getline(fc, item, ',')) {
      if (!item.empty()) st.first_certified.push_back(std::stol(item));
    }
  }
  if (static_cast<int>(st.first_certified.size()) != st.n) {
    throw std::runtime_error("read_stationary: first_certified length mismatch");
  }
  auto load = [&](const std::string& name) {
    GridFunction f = read_grid_csv((fs::path(dir) / name).string());
    if (!(f.spec == st.spec)) throw std::runtime_error("read_stationary: level grid mismatch");
    return f;
  };
  for (int m = 0; m <= st.n; ++m) st.Y.push_back(load("Y_" + std::to_string(m) + ".csv"));
  for (int m = 1; m <= st.n; ++m) st.q.push_back(load("q_" + std::to_string(m) + ".csv"));
  for (int m = 0; m < st.n; ++m) st.W.push_back(load("W_" + std::to_string(m) + ".csv"));
  return st;
}

}  // namespace blpp
