#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace blpp {

// Uniform time grid with 0 exactly on it.  Times are never accumulated:
// time(j) = (j - idx0) * step, so time(idx0) == 0.0 bit-exactly and every
// grid time is a single multiplication away from its index.
struct GridSpec {
  double step = 0.0;   // grid spacing, > 0
  long idx0 = 0;       // index of time 0 (number of points left of 0)
  long npts = 0;       // total number of grid points

  // Canonicalizes (t_min, t_max, step).  t_min/t_max must sit on the grid
  // (within 1e-6 * step) with t_min < 0 < t_max; throws otherwise.
  static GridSpec make(double t_min, double t_max, double step);

  double time(long j) const { return static_cast<double>(j - idx0) * step; }
  double t_min() const { return time(0); }
  double t_max() const { return time(npts - 1); }
  long n_intervals() const { return npts - 1; }

  // Index of a time that must lie on the grid (within 1e-6 * step).
  long index_of(double t) const;
  bool on_grid(double t) const;
  bool contains_index(long j) const { return j >= 0 && j < npts; }

  // Window symmetric about 0 (needed by reflection).
  bool symmetric() const { return npts == 2 * idx0 + 1; }

  bool operator==(const GridSpec&) const = default;
};

// A scalar function sampled on a grid.  v[j] is the value at spec.time(j).
struct GridFunction {
  GridSpec spec;
  std::vector<double> v;

  GridFunction() = default;
  GridFunction(GridSpec s, std::vector<double> vals);

  double operator[](long j) const { return v[static_cast<size_t>(j)]; }
  double at_time(double t) const { return v[static_cast<size_t>(spec.index_of(t))]; }
  // f(s,t) = f(t) - f(s), both on-grid.
  double increment(double s, double t) const;
  long size() const { return static_cast<long>(v.size()); }
};

// CSV with header "t,value", one row per grid point, 12 significant digits,
// LF line endings.
void write_grid_csv(const std::string& path, const GridFunction& f);
GridFunction read_grid_csv(const std::string& path);

// Shared numeric formatting for all CSV output (12 significant digits).
std::string format_sig12(double x);

}  // namespace blpp
