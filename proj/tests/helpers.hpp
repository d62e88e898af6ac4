#pragma once
// Shared helpers for the test suite: statistical acceptance bounds
// (chi-square tail, KS distance), small rotation utilities, and quadrature
// shorthands used by the density oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dirlin/dirlin.hpp"

namespace testutil {

// Regularized upper incomplete gamma Q(a, x), series/continued-fraction
// split as in standard references. Enough accuracy for p-value thresholds.
inline double gamma_q(double a, double x) {
  if (!(a > 0) || x < 0) throw std::invalid_argument("gamma_q domain");
  if (x == 0) return 1.0;
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, Q = 1 - P.
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int k = 0; k < 500; ++k) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - log_gamma_a);
    return 1.0 - p;
  }
  // Q(a,x) by Lentz continued fraction.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double frac = d;
  for (int k = 1; k < 500; ++k) {
    const double an = -static_cast<double>(k) * (static_cast<double>(k) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    frac *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return frac * std::exp(-x + a * std::log(x) - log_gamma_a);
}

inline double chi_square_upper_p(double stat, double dof) {
  return gamma_q(0.5 * dof, 0.5 * stat);
}

// Kolmogorov-Smirnov distance of a sample against Uniform(0,1).
inline double ks_uniform_distance(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double cdf_lo = static_cast<double>(i) / n;
    const double cdf_hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(p[i] - cdf_lo), std::abs(p[i] - cdf_hi)));
  }
  return d;
}

// Asymptotic KS critical value at level alpha.
inline double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

inline dirlin::UnitVector rotate2(const dirlin::UnitVector& x, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return dirlin::UnitVector{{c * x[0] - s * x[1], s * x[0] + c * x[1]}};
}

// A fixed orthonormal 3x3 rotation (product of rotations about z and x).
inline dirlin::UnitVector rotate3(const dirlin::UnitVector& x) {
  static const double a = 0.7, b = 1.1;
  const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
  const double r[3][3] = {{ca, -sa, 0.0},
                          {sa * cb, ca * cb, -sb},
                          {sa * sb, ca * sb, cb}};
  std::vector<double> y(3, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) y[i] += r[i][j] * x[j];
  return dirlin::normalized(y);
}

inline dirlin::UnitVector rotate_any(const dirlin::UnitVector& x, double angle) {
  return x.dim() == 2 ? rotate2(x, angle) : rotate3(x);
}

// Integral of f over the circle or sphere with a dense rule.
inline double integrate_sphere(int q, const std::function<double(const dirlin::UnitVector&)>& f,
                               std::size_t resolution = 1024) {
  const int res = static_cast<int>(resolution);
  const dirlin::QuadratureRule rule =
      q == 1 ? dirlin::make_circle_quadrature(res)
             : dirlin::make_sphere_quadrature(res / 8, res / 4);
  double acc = 0.0;
  std::vector<double> coords(static_cast<std::size_t>(rule.point_dim));
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double* p = rule.node(k);
    coords.assign(p, p + rule.point_dim);
    acc += rule.weights[k] * f(dirlin::UnitVector{coords});
  }
  return acc;
}

inline double integrate_line(double lo, double hi,
                             const std::function<double(double)>& f,
                             std::size_t nodes = 2048) {
  const dirlin::QuadratureRule rule =
      dirlin::make_line_quadrature(static_cast<int>(nodes), lo, hi);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.weights[k] * f(rule.nodes[k]);
  return acc;
}

// Random vMF x normal sample, the "well-behaved" fixture many tests use.
inline dirlin::DirLinSample vmf_normal_sample(int q, double kappa, std::size_t n,
                                              std::uint64_t seed, double z_slope = 0.0) {
  dirlin::Rng rng(seed);
  std::vector<double> mu_coords(static_cast<std::size_t>(q) + 1, 0.0);
  mu_coords.back() = 1.0;
  const auto vmf = dirlin::make_vmf(dirlin::UnitVector{mu_coords}, kappa);
  dirlin::DirLinSample s;
  s.x = dirlin::vmf_sample(vmf, n, rng);
  s.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.z[i] = z_slope * s.x[i].coords.back() + rng.normal();
  return s;
}

}  // namespace testutil
