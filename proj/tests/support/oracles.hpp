#pragma once

// Reference computations used to check the library. Each one reaches its
// answer by a route that shares no code with the implementation under test:
// adaptive quadrature of the CDF-difference integral, exact integration of a
// step-function CDF, high-order finite differences, and brute-force loops.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

namespace oracle {

inline double phi_cdf(double z) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::cdf(standard, z);
}

inline double phi_sf(double z) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::cdf(boost::math::complement(standard, z));
}

/// CRPS of N(mu, sigma^2) at y as the integral of (F(x) - 1{x >= y})^2,
/// split at y and evaluated on both half lines by exp-sinh quadrature.
inline double gaussian_crps_quadrature(double mu, double sigma, double y) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double tol = 1e-13;
  auto below = [&](double t) {
    const double f = phi_cdf((y - t - mu) / sigma);
    return f * f;
  };
  auto above = [&](double t) {
    const double s = phi_sf((y + t - mu) / sigma);
    return s * s;
  };
  return integrator.integrate(below, tol) + integrator.integrate(above, tol);
}

/// CRPS of the empirical CDF of `members` at y, integrating the squared
/// difference exactly over the intervals between sorted breakpoints.
inline double ensemble_crps_exact(std::vector<double> members, double y) {
  std::vector<double> points = members;
  points.push_back(y);
  std::sort(points.begin(), points.end());
  std::sort(members.begin(), members.end());
  const double m = static_cast<double>(members.size());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double lo = points[k];
    const double hi = points[k + 1];
    if (hi <= lo) continue;
    // Both CDFs are constant on [lo, hi); evaluate them at lo.
    const auto below = std::upper_bound(members.begin(), members.end(), lo) - members.begin();
    const double f = static_cast<double>(below) / m;
    const double h = lo >= y ? 1.0 : 0.0;
    total += (f - h) * (f - h) * (hi - lo);
  }
  return total;
}

/// Fourth-order central difference of a scalar function.
inline double derivative(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Plain central difference, the textbook h = 1e-6 check.
inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

/// Population mean and standard deviation by two explicit passes.
struct Moments {
  double mean;
  double std;
};

inline Moments population_moments(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

}  // namespace oracle
