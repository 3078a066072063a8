#pragma once

// Shared test scaffolding: unique scratch directories and small numeric
// helpers used across the per-module suites.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace testutil {

// Fresh empty directory under the system temp root, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / ("blpp_test_" + tag);
    fs::remove_all(base);
    fs::create_directories(base);
    path_ = base.string();
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string sub(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double var_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (const double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double corr_of(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double mx = mean_of(xs), my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double quantile_of(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  const size_t i = static_cast<size_t>(p * static_cast<double>(xs.size() - 1));
  return xs[i];
}

}  // namespace testutil
