#include "blpp/busemann.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace blpp {

long BusemannSlice::certified_hi() const {
  const long n = static_cast<long>(attain.size());
  long hi = -1;
  for (long j = 0; j < n; ++j) {
    if (attain[static_cast<size_t>(j)] <= n - 3) hi = j;
    else break;  // attain indices are nondecreasing
  }
  return hi;
}

const BusemannSlice& BusemannStack::slice(int lv) const {
  if (!has_level(lv)) throw std::out_of_range("BusemannStack::slice: level outside range");
  return slices[static_cast<size_t>(lv - lo)];
}

int default_seed_padding(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("default_seed_padding: theta must be > 0");
  return std::max(10, static_cast<int>(std::ceil(4.0 / theta)));
}

BusemannStack sample_busemann_recursion(const BrownianField& field, double theta,
                                        int seed_level, int lo, int hi, SupMode mode) {
  if (!(theta > 0.0)) throw std::invalid_argument("sample_busemann_recursion: theta must be > 0");
  if (lo > hi) throw std::invalid_argument("sample_busemann_recursion: need lo <= hi");
  if (seed_level <= hi) {
    throw std::invalid_argument("sample_busemann_recursion: seed level must exceed the top kept level");
  }
  if (!field.has_level(lo - 1) || !field.has_level(seed_level - 1)) {
    throw std::invalid_argument("sample_busemann_recursion: field must cover levels lo-1 .. seed_level-1");
  }

  BusemannStack st;
  st.spec = field.spec;
  st.theta = theta;
  st.lo = lo;
  st.hi = hi;
  st.seed_level = seed_level;
  st.seed = field.seed;
  st.mode = mode;
  st.sampler = StackSampler::Recursion;
  st.slices.resize(static_cast<size_t>(hi - lo + 1));
  for (int lv = lo; lv <= hi; ++lv) st.slices[static_cast<size_t>(lv - lo)].level = lv;

  const double drift = 1.0 / std::sqrt(theta);
  const StreamKey root = StreamKey::root(field.seed);
  std::vector<double> h = sample_brownian(field.spec, drift,
                                          root.child(tag::kSeedLine).child_signed(seed_level));
  // Descend: at u the pair (h_u, B_{u-1}) produces h_{u-1}, v_u, X_u.
  for (int u = seed_level; u >= lo; --u) {
    Rng bridge(root.child(tag::kBridge).child_signed(u - 1));
    Rng* rng = mode == SupMode::Bridge ? &bridge : nullptr;
    QueueOutput out = queue_apply(field.spec, h, field.line(u - 1), mode, rng);
    if (u >= lo && u <= hi) {
      BusemannSlice& s = st.slices[static_cast<size_t>(u - lo)];
      s.h = GridFunction(field.spec, h);
      s.v = GridFunction(field.spec, std::move(out.q));
      s.x_dual = GridFunction(field.spec, std::move(out.r));
      s.attain = std::move(out.attain);
    }
    h = std::move(out.d);
  }
  return st;
}

std::vector<std::vector<double>> last_passage_to_point(const Field& f, int m, int n,
                                                       long jt) {
  if (m > n) throw std::invalid_argument("last_passage_to_point: need m <= n");
  if (!f.has_level(m) || !f.has_level(n)) {
    throw std::invalid_argument("last_passage_to_point: field does not cover levels");
  }
  if (!f.spec.contains_index(jt)) {
    throw std::out_of_range("last_passage_to_point: terminal outside window");
  }
  const long cols = jt + 1;
  std::vector<std::vector<double>> rows(static_cast<size_t>(n - m + 1),
                                        std::vector<double>(static_cast<size_t>(cols)));
  // Top level: straight run along B_n to the terminal.
  {
    const auto& b = f.line(n);
    auto& row = rows[static_cast<size_t>(n - m)];
    row[static_cast<size_t>(jt)] = 0.0;
    for (long j = jt - 1; j >= 0; --j) {
      row[static_cast<size_t>(j)] = row[static_cast<size_t>(j + 1)] +
                                    (b[static_cast<size_t>(j + 1)] - b[static_cast<size_t>(j)]);
    }
  }
  for (int r = n - 1; r >= m; --r) {
    const auto& b = f.line(r);
    auto& row = rows[static_cast<size_t>(r - m)];
    const auto& above = rows[static_cast<size_t>(r - m + 1)];
    row[static_cast<size_t>(jt)] = above[static_cast<size_t>(jt)];
    for (long j = jt - 1; j >= 0; --j) {
      const double inc = b[static_cast<size_t>(j + 1)] - b[static_cast<size_t>(j)];
      row[static_cast<size_t>(j)] =
          std::max(row[static_cast<size_t>(j + 1)] + inc, above[static_cast<size_t>(j)]);
    }
  }
  return rows;
}

namespace {

long snap_ray_index(const GridSpec& spec, double t) {
  const long j = spec.idx0 + static_cast<long>(std::llround(t / spec.step));
  if (!spec.contains_index(j)) {
    throw std::out_of_range("busemann: terminal ray outside window");
  }
  return j;
}

}  // namespace

double estimate_busemann_limit(const Field& field, double theta, int m, long js,
                               int k, long jt, int n) {
  if (!(theta > 0.0)) throw std::invalid_argument("estimate_busemann_limit: theta must be > 0");
  if (m > n || k > n) throw std::invalid_argument("estimate_busemann_limit: starts above terminal level");
  const long jn = snap_ray_index(field.spec, static_cast<double>(n) * theta);
  if (jn < js || jn < jt) {
    throw std::invalid_argument("estimate_busemann_limit: terminal left of a start");
  }
  const auto rows = last_passage_to_point(field, std::min(m, k), n, jn);
  const int base = std::min(m, k);
  return rows[static_cast<size_t>(m - base)][static_cast<size_t>(js)] -
         rows[static_cast<size_t>(k - base)][static_cast<size_t>(jt)];
}

Field dual_field(const BusemannStack& stack) {
  Field f;
  f.spec = stack.spec;
  f.lo = stack.lo;
  f.lines.reserve(stack.slices.size());
  for (const auto& s : stack.slices) {
    if (s.x_dual.size() != stack.spec.npts) {
      throw std::invalid_argument("dual_field: stack has an unfilled level");
    }
    f.lines.push_back(s.x_dual.v);
  }
  return f;
}

CheckReport monotonicity_check(const Field& field, double gamma, double theta,
                               int m, int n, double tol) {
  if (!(gamma > 0.0) || !(gamma < theta)) {
    throw std::invalid_argument("monotonicity_check: need 0 < gamma < theta");
  }
  if (m + 1 > n) throw std::invalid_argument("monotonicity_check: need m + 1 <= n");
  const long jg = snap_ray_index(field.spec, static_cast<double>(n) * gamma);
  const long jt = snap_ray_index(field.spec, static_cast<double>(n) * theta);
  if (jg >= jt) {
    throw std::invalid_argument("monotonicity_check: terminal rays collapse on this grid");
  }
  const auto tg = last_passage_to_point(field, m, n, jg);
  const auto tt = last_passage_to_point(field, m, n, jt);
  const auto& g_m = tg[0];
  const auto& g_m1 = tg[1];
  const auto& t_m = tt[0];
  const auto& t_m1 = tt[1];

  double worst = 0.0;
  long used = 0;
  // v-estimates: 0 <= vhat^gamma(j) <= vhat^theta(j).
  for (long j = 0; j <= jg; ++j) {
    const double vg = g_m[static_cast<size_t>(j)] - g_m1[static_cast<size_t>(j)];
    const double vt = t_m[static_cast<size_t>(j)] - t_m1[static_cast<size_t>(j)];
    worst = std::max(worst, -vg);
    worst = std::max(worst, vg - vt);
    ++used;
  }
  // h-estimates: hhat^theta(s,t) <= hhat^gamma(s,t) for all s < t <=> the
  // column profile difference T^gamma[m] - T^theta[m] is nonincreasing.
  for (long j = 0; j < jg; ++j) {
    const double d0 = g_m[static_cast<size_t>(j)] - t_m[static_cast<size_t>(j)];
    const double d1 = g_m[static_cast<size_t>(j + 1)] - t_m[static_cast<size_t>(j + 1)];
    worst = std::max(worst, d1 - d0);
    ++used;
  }
  return make_check("busemann-monotonicity", worst, tol, used);
}

CheckReport reversal_duality_check(const BusemannStack& stack, const Field& field,
                                   double tol) {
  if (stack.mode != SupMode::Grid) {
    throw std::invalid_argument("reversal_duality_check: grid-mode stacks only");
  }
  double worst = 0.0;
  long used = 0, excluded = 0;
  for (int mlev = stack.lo; mlev <= stack.hi; ++mlev) {
    if (!field.has_level(mlev - 1)) continue;
    QueuePair p{stack.slice(mlev).h, GridFunction(stack.spec, field.line(mlev - 1))};
    CheckReport r = invert_check(p, 1, 0, tol);
    if (r.n_excluded > 0) {
      ++excluded;
      continue;
    }
    worst = std::max(worst, r.value);
    ++used;
  }
  CheckReport rep = make_check("busemann-reversal-duality", worst, tol, used, excluded);
  if (used == 0) {
    rep.pass = false;
    rep.detail = "no pair certified (window too short)";
  }
  return rep;
}

CheckReport additivity_check(const BusemannStack& stack, double tol) {
  double worst = 0.0;
  long used = 0;
  for (int mlev = stack.lo + 1; mlev <= stack.hi; ++mlev) {
    const auto& top = stack.slice(mlev);     // h_m, v_m
    const auto& bot = stack.slice(mlev - 1); // h_{m-1}
    for (long j = 0; j + 1 < stack.spec.npts; ++j) {
      const double lhs = top.v[j] + (top.h[j + 1] - top.h[j]);
      const double rhs = (bot.h[j + 1] - bot.h[j]) + top.v[j + 1];
      worst = std::max(worst, std::abs(lhs - rhs));
      ++used;
    }
  }
  return make_check("busemann-additivity", worst, tol, used);
}

void write_stack(const std::string& dir, const BusemannStack& stack) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream man(fs::path(dir) / "stack.json", std::ios::binary);
  if (!man) throw std::runtime_error("write_stack: cannot open manifest in " + dir);
  man << "t_min:" << format_sig12(stack.spec.t_min()) << '\n'
      << "t_max:" << format_sig12(stack.spec.t_max()) << '\n'
      << "step:" << format_sig12(stack.spec.step) << '\n'
      << "theta:" << format_sig12(stack.theta) << '\n'
      << "lo_level:" << stack.lo << '\n'
      << "hi_level:" << stack.hi << '\n'
      << "seed_level:" << stack.seed_level << '\n'
      << "seed:" << stack.seed << '\n'
      << "mode:" << (stack.mode == SupMode::Grid ? "grid" : "bridge") << '\n'
      << "sampler:" << (stack.sampler == StackSampler::Recursion ? "recursion" : "limit") << '\n';
  for (const auto& s : stack.slices) {
    const std::string lv = std::to_string(s.level);
    write_grid_csv((fs::path(dir) / ("h_" + lv + ".csv")).string(), s.h);
    write_grid_csv((fs::path(dir) / ("v_" + lv + ".csv")).string(), s.v);
    write_grid_csv((fs::path(dir) / ("X_" + lv + ".csv")).string(), s.x_dual);
  }
}

BusemannStack read_stack(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream man(fs::path(dir) / "stack.json", std::ios::binary);
  if (!man) throw std::runtime_error("read_stack: cannot open manifest in " + dir);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(man, line)) {
    const auto pos = line.find(':');
    if (pos == std::string::npos) continue;
    kv[line.substr(0, pos)] = line.substr(pos + 1);
  }
  for (const char* want : {"t_min", "t_max", "step", "theta", "lo_level", "hi_level",
                           "seed_level", "seed", "mode", "sampler"}) {
    if (!kv.count(want)) throw std::runtime_error("read_stack: manifest missing key " + std::string(want));
  }
  BusemannStack st;
  st.spec = GridSpec::make(std::stod(kv["t_min"]), std::stod(kv["t_max"]), std::stod(kv["step"]));
  st.theta = std::stod(kv["theta"]);
  st.lo = std::stoi(kv["lo_level"]);
  st.hi = std::stoi(kv["hi_level"]);
  st.seed_level = std::stoi(kv["seed_level"]);
  st.seed = std::stoull(kv["seed"]);
  st.mode = kv["mode"] == "bridge" ? SupMode::Bridge : SupMode::Grid;
  st.sampler = kv["sampler"] == "limit" ? StackSampler::LimitEstimate : StackSampler::Recursion;
  for (int lv = st.lo; lv <= st.hi; ++lv) {
    BusemannSlice s;
    s.level = lv;
    const std::string name = std::to_string(lv);
    s.h = read_grid_csv((fs::path(dir) / ("h_" + name + ".csv")).string());
    s.v = read_grid_csv((fs::path(dir) / ("v_" + name + ".csv")).string());
    s.x_dual = read_grid_csv((fs::path(dir) / ("X_" + name + ".csv")).string());
    if (!(s.h.spec == st.spec) || !(s.v.spec == st.spec) || !(s.x_dual.spec == st.spec)) {
      throw std::runtime_error("read_stack: level grid mismatch");
    }
    st.slices.push_back(std::move(s));
  }
  return st;
}

}  // namespace blpp
