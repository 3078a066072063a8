#pragma once

#include <blpp/check.hpp>
#include <blpp/rng.hpp>

#include <functional>
#include <string>
#include <vector>

namespace blpp {

// Statistical test rows reuse the common report shape.
using TestReport = CheckReport;

// Standard normal CDF via erfc (relative error ~1e-15 on the tested range).
double normal_cdf(double x);

// log(erfc(u) / 2); switches to the asymptotic series once erfc underflows.
double log_half_erfc(double u);

// CDF of sup_{s >= 0} { sqrt(2) B(s) - lambda s } ~ Exp(lambda):
// 1 - e^{-lambda x} for x >= 0, 0 below. lambda <= 0 -> domain error.
double exp_sup_cdf(double lambda, double x);

// CDF of D(t) = sup_{s >= 0} {sqrt(2) B(s) - lambda s}
//             - sup_{s >= t} {sqrt(2) B(s) - lambda s}, for z >= 0:
//   Phi((z - lt)/sqrt(2t))
//   + e^{lz} ((1 + lz + l^2 t) Phi(-(z + lt)/sqrt(2t)) - l sqrt(t/pi) e^{-(z+lt)^2/(4t)})
// The e^{lz} Phi(-.) product is assembled in log space; the result is clamped
// to [0,1] (a one-time stderr warning reports sub-1e-12 roundoff excursions;
// larger excursions throw).
double increment_cdf_D(double lambda, double t, double z);

// P(T > t) for T the unique maximizer of sqrt(2) B(s) - lambda s on [0, inf):
//   (2 + l^2 t) Phi(-l sqrt(t/2)) - l sqrt(t/pi) e^{-l^2 t / 4}.
// argmax_tail(lambda, 0) == 1 exactly; equals increment_cdf_D(lambda, t, 0).
double argmax_tail(double lambda, double t);

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
// Requires >= 100 samples.
double ks_distance(const std::vector<double>& samples,
                   const std::function<double(double)>& cdf);

TestReport ks_check(const std::string& name, const std::vector<double>& samples,
                    const std::function<double(double)>& cdf, double threshold,
                    long n_excluded = 0);

// Variants for laws with atoms: cdf_left(x) must return the left limit F(x-)
// (equal to cdf(x) wherever the law is continuous), so the statistic compares
// the empirical jump against the true jump instead of charging the atom as
// error.
double ks_distance(const std::vector<double>& samples,
                   const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left);
TestReport ks_check(const std::string& name, const std::vector<double>& samples,
                    const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left, double threshold,
                    long n_excluded = 0);

// Passes iff |sample mean - mean| < k_sigma * sqrt(var / n).
TestReport moment_check(const std::vector<double>& samples, double mean, double var,
                        double k_sigma);

// Simulation oracles: one realization of sqrt(2) B(s) - lambda s on the
// right-half grid s = 0, step, ..., horizon. With bridge_sup (default) each
// interval contributes the exact conditional maximum of the variance-rate-2
// bridge between its endpoints, so the sampled supremum has the continuum law
// (up to the horizon); a plain endpoint scan undershoots by ~0.58 sqrt(2 step)
// and is kept only as the naive variant. Bridge argmax times are reported at
// the maximizing interval's midpoint.
struct DriftedWalkSample {
  double sup = 0.0;     // supremum (s = 0 included)
  double argmax = 0.0;  // maximizing time (leftmost grid point / interval midpoint)
};
DriftedWalkSample drifted_sup_sample(double lambda, double step, double horizon, Rng& rng,
                                     bool bridge_sup = true);

// D(t): sup over [0, horizon] minus sup over [t, horizon] of one walk; exact
// in law under bridge_sup (the two suprema share every interval maximum, so
// the atom at 0 comes out float-exact). t must sit on the walk grid.
double increment_D_sample(double lambda, double t, double step, double horizon, Rng& rng,
                          bool bridge_sup = true);

}  // namespace blpp
