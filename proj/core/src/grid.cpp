#include "blpp/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace blpp {

GridSpec GridSpec::make(double t_min, double t_max, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("GridSpec: step must be positive and finite");
  }
  if (!(t_min < 0.0) || !(t_max > 0.0)) {
    throw std::invalid_argument("GridSpec: need t_min < 0 < t_max");
  }
  const double left = -t_min / step;
  const double right = t_max / step;
  const long nl = std::lround(left);
  const long nr = std::lround(right);
  if (std::fabs(left - static_cast<double>(nl)) > 1e-6 ||
      std::fabs(right - static_cast<double>(nr)) > 1e-6) {
    throw std::invalid_argument("GridSpec: t_min and t_max must be multiples of step");
  }
  if (nl < 1 || nr < 1) {
    throw std::invalid_argument("GridSpec: window must contain 0 strictly inside");
  }
  GridSpec g;
  g.step = step;
  g.idx0 = nl;
  g.npts = nl + nr + 1;
  return g;
}

long GridSpec::index_of(double t) const {
  const double x = t / step;
  const long j = idx0 + std::lround(x);
  if (j < 0 || j >= npts) {
    throw std::out_of_range("GridSpec::index_of: time outside window");
  }
  if (std::fabs(t - time(j)) > 1e-6 * step) {
    throw std::invalid_argument("GridSpec::index_of: time not on grid");
  }
  return j;
}

bool GridSpec::on_grid(double t) const {
  const double x = t / step;
  const long j = idx0 + std::lround(x);
  return j >= 0 && j < npts && std::fabs(t - time(j)) <= 1e-6 * step;
}

GridFunction::GridFunction(GridSpec s, std::vector<double> vals) : spec(s), v(std::move(vals)) {
  if (static_cast<long>(v.size()) != spec.npts) {
    throw std::invalid_argument("GridFunction: value count does not match grid");
  }
}

double GridFunction::increment(double s, double t) const {
  return v[static_cast<size_t>(spec.index_of(t))] - v[static_cast<size_t>(spec.index_of(s))];
}

std::string format_sig12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::string(buf);
}

void write_grid_csv(const std::string& path, const GridFunction& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_grid_csv: cannot open " + path);
  out << "t,value\n";
  for (long j = 0; j < f.spec.npts; ++j) {
    out << format_sig12(f.spec.time(j)) << ',' << format_sig12(f.v[static_cast<size_t>(j)])
        << '\n';
  }
  if (!out) throw std::runtime_error("write_grid_csv: write failed for " + path);
}

GridFunction read_grid_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_grid_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,value", 0) != 0) {
    throw std::runtime_error("read_grid_csv: missing t,value header in " + path);
  }
  std::vector<double> times, vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw std::runtime_error("read_grid_csv: malformed row in " + path);
    }
    times.push_back(std::stod(a));
    vals.push_back(std::stod(b));
  }
  if (times.size() < 3) throw std::runtime_error("read_grid_csv: too few rows in " + path);
  const double step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  GridSpec spec = GridSpec::make(times.front(), times.back(), step);
  if (spec.npts != static_cast<long>(times.size())) {
    throw std::runtime_error("read_grid_csv: row count does not match grid in " + path);
  }
  return GridFunction(spec, std::move(vals));
}

}  // namespace blpp
