#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "lpturb/error.hpp"

namespace lpturb {

/// Pairwise (tree) summation of f(0..count-1). The split points depend only on
/// count, so the result is identical however the caller schedules work.
template <class F>
double pairwise_sum(std::size_t begin, std::size_t end, const F& f) {
  const std::size_t len = end - begin;
  if (len <= 64) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += f(i);
    return s;
  }
  const std::size_t mid = begin + len / 2;
  return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

template <class F>
double pairwise_sum(std::size_t count, const F& f) {
  return pairwise_sum(std::size_t{0}, count, f);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.size(), [&](std::size_t i) { return v[i]; });
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;      // root-mean-square residual
  double slope_stderr = 0.0;  // infinite when fewer than 3 points
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorKind::input, "least_squares: size mismatch");
  const std::size_t n = x.size();
  require(n >= 2, ErrorKind::fit, "least_squares: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::fit, "least_squares: abscissae are all equal");
  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / double(n));
  fit.slope_stderr = n > 2 ? std::sqrt(ss / double(n - 2) / sxx) : std::numeric_limits<double>::infinity();
  return fit;
}

inline double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace lpturb
