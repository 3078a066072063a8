#include "blpp/distlib.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace blpp {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_half_erfc(double u) {
  const double e = std::erfc(u);
  if (e > 0.0) return std::log(0.5 * e);
  // erfc underflowed (u > ~26.5): erfc(u) ~ e^{-u^2} / (u sqrt(pi)) * (1 - 1/(2u^2) + ...)
  const double u2 = u * u;
  return -u2 - std::log(2.0 * u * std::sqrt(M_PI)) + std::log1p(-0.5 / u2);
}

double exp_sup_cdf(double lambda, double x) {
  if (!(lambda > 0.0)) throw std::domain_error("exp_sup_cdf: lambda must be > 0");
  if (x < 0.0) return 0.0;
  return -std::expm1(-lambda * x);
}

double increment_cdf_D(double lambda, double t, double z) {
  if (!(lambda > 0.0)) throw std::domain_error("increment_cdf_D: lambda must be > 0");
  if (!(t > 0.0)) throw std::domain_error("increment_cdf_D: t must be > 0");
  if (!(z >= 0.0)) throw std::domain_error("increment_cdf_D: z must be >= 0");
  const double sq2t = std::sqrt(2.0 * t);
  const double a = (z + lambda * t) / (2.0 * std::sqrt(t));  // Phi(-(z+lt)/sqrt(2t)) = erfc(a)/2
  const double poly = 1.0 + lambda * z + lambda * lambda * t;
  double val = normal_cdf((z - lambda * t) / sq2t);
  val += poly * std::exp(lambda * z + log_half_erfc(a));
  val -= lambda * std::sqrt(t / M_PI) * std::exp(lambda * z - a * a);

  if (val < 0.0 || val > 1.0) {
    const double excess = val < 0.0 ? -val : val - 1.0;
    if (excess >= 1e-12) {
      throw std::runtime_error("increment_cdf_D: value left [0,1] beyond roundoff");
    }
    if (excess >= 1e-14) {  // few-ulp excursions are routine; larger ones get one report
      static bool warned = false;
      if (!warned) {
        warned = true;
        std::cerr << "increment_cdf_D: clamping roundoff excursion of " << excess
                  << " (further clamps silent)\n";
      }
    }
    val = std::clamp(val, 0.0, 1.0);
  }
  return val;
}

double argmax_tail(double lambda, double t) {
  if (!(lambda > 0.0)) throw std::domain_error("argmax_tail: lambda must be > 0");
  if (!(t >= 0.0)) throw std::domain_error("argmax_tail: t must be >= 0");
  const double phi = normal_cdf(-lambda * std::sqrt(0.5 * t));
  return (2.0 + lambda * lambda * t) * phi -
         lambda * std::sqrt(t / M_PI) * std::exp(-0.25 * lambda * lambda * t);
}

double ks_distance(const std::vector<double>& samples,
                   const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left) {
  if (samples.size() < 100) throw std::invalid_argument("ks_distance: need >= 100 samples");
  std::vector<double> x = samples;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    d = std::max(d, cdf_left(x[i]) - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - cdf(x[i]));
  }
  return d;
}

double ks_distance(const std::vector<double>& samples,
                   const std::function<double(double)>& cdf) {
  return ks_distance(samples, cdf, cdf);
}

TestReport ks_check(const std::string& name, const std::vector<double>& samples,
                    const std::function<double(double)>& cdf, double threshold,
                    long n_excluded) {
  return make_check(name, ks_distance(samples, cdf), threshold,
                    static_cast<long>(samples.size()), n_excluded);
}

TestReport ks_check(const std::string& name, const std::vector<double>& samples,
                    const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left, double threshold,
                    long n_excluded) {
  return make_check(name, ks_distance(samples, cdf, cdf_left), threshold,
                    static_cast<long>(samples.size()), n_excluded);
}

TestReport moment_check(const std::vector<double>& samples, double mean, double var,
                        double k_sigma) {
  if (samples.size() < 100) throw std::invalid_argument("moment_check: need >= 100 samples");
  if (!(var > 0.0) || !(k_sigma > 0.0)) {
    throw std::invalid_argument("moment_check: var and k_sigma must be > 0");
  }
  double acc = 0.0;
  for (const double v : samples) acc += v;
  const double n = static_cast<double>(samples.size());
  const double diff = std::abs(acc / n - mean);
  return make_check("moment-mean", diff, k_sigma * std::sqrt(var / n),
                    static_cast<long>(samples.size()));
}

namespace {

// Exact max of a variance-rate-2 Brownian bridge over one step given its
// endpoints a, b: M = (a + b + sqrt((a-b)^2 - 4 step ln U)) / 2, U ~ U(0,1).
double bridge_interval_max(double a, double b, double step, Rng& rng) {
  const double u = rng.uniform_open01();
  const double d = a - b;
  return 0.5 * (a + b + std::sqrt(d * d - 4.0 * step * std::log(u)));
}

}  // namespace

DriftedWalkSample drifted_sup_sample(double lambda, double step, double horizon, Rng& rng,
                                     bool bridge_sup) {
  if (!(lambda > 0.0) || !(step > 0.0) || !(horizon >= step)) {
    throw std::invalid_argument("drifted_sup_sample: bad parameters");
  }
  const long n = static_cast<long>(std::llround(horizon / step));
  const double sd = std::sqrt(2.0 * step);
  DriftedWalkSample out;  // s = 0 contributes sup 0, argmax 0
  double x = 0.0;
  if (bridge_sup) out.sup = -std::numeric_limits<double>::infinity();
  for (long k = 1; k <= n; ++k) {
    const double prev = x;
    x += sd * rng.normal() - lambda * step;
    if (bridge_sup) {
      const double m = bridge_interval_max(prev, x, step, rng);
      if (m > out.sup) {
        out.sup = m;
        out.argmax = (static_cast<double>(k) - 0.5) * step;
      }
    } else if (x > out.sup) {
      out.sup = x;
      out.argmax = static_cast<double>(k) * step;
    }
  }
  return out;
}

double increment_D_sample(double lambda, double t, double step, double horizon, Rng& rng,
                          bool bridge_sup) {
  if (!(lambda > 0.0) || !(step > 0.0) || !(t > 0.0) || !(horizon >= t + step)) {
    throw std::invalid_argument("increment_D_sample: bad parameters");
  }
  const long jt = static_cast<long>(std::llround(t / step));
  if (std::abs(static_cast<double>(jt) * step - t) > 1e-9 * step) {
    throw std::invalid_argument("increment_D_sample: t must lie on the walk grid");
  }
  const long n = static_cast<long>(std::llround(horizon / step));
  const double sd = std::sqrt(2.0 * step);
  const double ninf = -std::numeric_limits<double>::infinity();
  double x = 0.0;
  double sup_all = bridge_sup ? ninf : 0.0;
  double sup_tail = ninf;
  for (long k = 1; k <= n; ++k) {
    const double prev = x;
    x += sd * rng.normal() - lambda * step;
    const double v = bridge_sup ? bridge_interval_max(prev, x, step, rng) : x;
    sup_all = std::max(sup_all, v);
    // interval k covers ((k-1) step, k step]; tail intervals start at jt+1,
    // and in grid mode the point k == jt itself enters the tail.
    if (k > jt || (!bridge_sup && k == jt)) sup_tail = std::max(sup_tail, v);
  }
  if (jt == 0) sup_tail = sup_all;
  return sup_all - sup_tail;
}

}  // namespace blpp
