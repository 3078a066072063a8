#include "blpp/envgen.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blpp {

const std::vector<double>& Field::line(int lv) const {
  if (!has_level(lv)) throw std::out_of_range("Field::line: level outside range");
  return lines[static_cast<size_t>(lv - lo)];
}

std::vector<double>& Field::line(int lv) {
  if (!has_level(lv)) throw std::out_of_range("Field::line: level outside range");
  return lines[static_cast<size_t>(lv - lo)];
}

double Field::increment(int lv, double s, double t) const {
  return increment_idx(lv, spec.index_of(s), spec.index_of(t));
}

std::vector<double> sample_brownian(const GridSpec& spec, double drift, StreamKey key) {
  std::vector<double> v(static_cast<size_t>(spec.npts));
  const double sd = std::sqrt(spec.step);
  const double mu = drift * spec.step;
  Rng right(key.child(tag::kRight));
  Rng left(key.child(tag::kLeft));
  v[static_cast<size_t>(spec.idx0)] = 0.0;
  for (long j = spec.idx0 + 1; j < spec.npts; ++j) {
    v[static_cast<size_t>(j)] = v[static_cast<size_t>(j - 1)] + mu + sd * right.normal();
  }
  for (long j = spec.idx0 - 1; j >= 0; --j) {
    v[static_cast<size_t>(j)] = v[static_cast<size_t>(j + 1)] - mu - sd * left.normal();
  }
  return v;
}

BrownianField sample_field(const GridSpec& spec, int lo, int hi, uint64_t seed, double drift) {
  if (hi < lo) throw std::invalid_argument("sample_field: need lo <= hi");
  BrownianField f;
  f.spec = spec;
  f.lo = lo;
  f.seed = seed;
  f.drift = drift;
  f.lines.reserve(static_cast<size_t>(hi - lo + 1));
  const StreamKey root = StreamKey::root(seed).child(tag::kLine);
  for (int lv = lo; lv <= hi; ++lv) {
    f.lines.push_back(sample_brownian(spec, drift, root.child_signed(lv)));
  }
  return f;
}

std::vector<double> reflect_line(const GridSpec& spec, const std::vector<double>& v) {
  if (!spec.symmetric()) {
    throw std::invalid_argument("reflect: window must be symmetric about 0");
  }
  std::vector<double> out(v.size());
  const long n = spec.npts;
  for (long j = 0; j < n; ++j) {
    out[static_cast<size_t>(j)] = -v[static_cast<size_t>(n - 1 - j)];
  }
  return out;
}

GridFunction reflect(const GridFunction& f) {
  return GridFunction(f.spec, reflect_line(f.spec, f.v));
}

void write_field(const std::string& dir, const BrownianField& field) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream man(fs::path(dir) / "field.json", std::ios::binary);
  if (!man) throw std::runtime_error("write_field: cannot open manifest in " + dir);
  man << "t_min:" << format_sig12(field.spec.t_min()) << '\n'
      << "t_max:" << format_sig12(field.spec.t_max()) << '\n'
      << "step:" << format_sig12(field.spec.step) << '\n'
      << "lo_level:" << field.lo_level() << '\n'
      << "hi_level:" << field.hi_level() << '\n'
      << "seed:" << field.seed << '\n'
      << "drift:" << format_sig12(field.drift) << '\n';
  for (int lv = field.lo_level(); lv <= field.hi_level(); ++lv) {
    GridFunction g(field.spec, field.line(lv));
    write_grid_csv((fs::path(dir) / ("B_" + std::to_string(lv) + ".csv")).string(), g);
  }
}

BrownianField read_field(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream man(fs::path(dir) / "field.json", std::ios::binary);
  if (!man) throw std::runtime_error("read_field: cannot open manifest in " + dir);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(man, line)) {
    const auto pos = line.find(':');
    if (pos == std::string::npos) continue;
    kv[line.substr(0, pos)] = line.substr(pos + 1);
  }
  for (const char* want : {"t_min", "t_max", "step", "lo_level", "hi_level", "seed", "drift"}) {
    if (!kv.count(want)) throw std::runtime_error("read_field: manifest missing key " + std::string(want));
  }
  BrownianField f;
  f.spec = GridSpec::make(std::stod(kv["t_min"]), std::stod(kv["t_max"]), std::stod(kv["step"]));
  f.lo = std::stoi(kv["lo_level"]);
  const int hi = std::stoi(kv["hi_level"]);
  f.seed = std::stoull(kv["seed"]);
  f.drift = std::stod(kv["drift"]);
  for (int lv = f.lo; lv <= hi; ++lv) {
    GridFunction g = read_grid_csv((fs::path(dir) / ("B_" + std::to_string(lv) + ".csv")).string());
    if (!(g.spec == f.spec)) throw std::runtime_error("read_field: level grid mismatch");
    f.lines.push_back(std::move(g.v));
  }
  return f;
}

}  // namespace blpp
