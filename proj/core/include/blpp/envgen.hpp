#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "blpp/grid.hpp"
#include "blpp/rng.hpp"

namespace blpp {

// A stack of lines sampled on a common grid, indexed by integer level.
// lines[k] belongs to level lo + k.
struct Field {
  GridSpec spec;
  int lo = 0;
  std::vector<std::vector<double>> lines;

  int lo_level() const { return lo; }
  int hi_level() const { return lo + static_cast<int>(lines.size()) - 1; }
  bool has_level(int lv) const { return lv >= lo_level() && lv <= hi_level(); }
  const std::vector<double>& line(int lv) const;
  std::vector<double>& line(int lv);

  // B_lv(s,t) with s,t on-grid.
  double increment(int lv, double s, double t) const;
  double increment_idx(int lv, long js, long jt) const {
    const auto& b = line(lv);
    return b[static_cast<size_t>(jt)] - b[static_cast<size_t>(js)];
  }
};

// A Field that remembers how it was sampled.
struct BrownianField : Field {
  uint64_t seed = 0;
  double drift = 0.0;
};

// Two-sided Brownian line anchored at value 0 at time 0.  Increments right of
// 0 and left of 0 come from two independent sub-streams of `key`, so widening
// the window never changes values at shared grid points.
std::vector<double> sample_brownian(const GridSpec& spec, double drift, StreamKey key);

// Independent lines for levels lo..hi; line at level lv depends only on
// (seed, lv), never on the requested range.
BrownianField sample_field(const GridSpec& spec, int lo, int hi, uint64_t seed,
                           double drift = 0.0);

// f~(t) = -f(-t); requires a window symmetric about 0.
GridFunction reflect(const GridFunction& f);
std::vector<double> reflect_line(const GridSpec& spec, const std::vector<double>& v);

// Serialization: one CSV per level named B_<level>.csv plus a plain-text
// key:value manifest named field.json recording spec, seed, drift and levels.
void write_field(const std::string& dir, const BrownianField& field);
BrownianField read_field(const std::string& dir);

}  // namespace blpp
