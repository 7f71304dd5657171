#pragma once

// Small statistical helpers shared by the experiment drivers and tests:
// normal CDF, Kolmogorov-Smirnov distance, moments, correlation, and
// log-log slope fitting.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "walklab/errors.hpp"

namespace walklab {

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Kolmogorov-Smirnov statistic sup_x |F_n(x) - F(x)| of `samples` against
/// the continuous CDF `cdf`.  The sample vector is copied and sorted.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ValidationError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    worst = std::max(worst, std::abs(F - static_cast<double>(i) / n));
    worst = std::max(worst, std::abs(static_cast<double>(i + 1) / n - F));
  }
  return worst;
}

inline double sample_mean(const std::vector<double>& xs) {
  if (xs.empty()) throw ValidationError("sample_mean: no samples");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Unbiased sample standard deviation (n - 1 in the denominator).
inline double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) throw ValidationError("sample_sd: need >= 2 samples");
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x,
                       const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("ls_slope: need >= 2 paired samples");
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("ls_slope: degenerate abscissae");
  return sxy / sxx;
}

/// Slope of log y against log x; x and y must be positive.
inline double log_log_slope(const std::vector<double>& x,
                            const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw ValidationError("log_log_slope: inputs must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return ls_slope(lx, ly);
}

inline double pearson_correlation(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("pearson_correlation: need >= 2 paired samples");
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError("pearson_correlation: degenerate sample");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace walklab
