#pragma once
// Kernel density estimation with a von Mises kernel on the sphere and a
// normal kernel on the line, plus the LCV / LSCV bandwidth selectors.
//
// All kernel evaluations go through the log normalizer of the concentrated
// von Mises-Fisher kernel, exp(log_chq(q,h) - (1 - x'X_i)/h^2), so nothing
// overflows even at very small bandwidths: the exponent never exceeds
// log_chq. The LSCV roughness integral has a closed form in terms of the
// pairwise Gram matrices Psi(h) and Omega(g); no quadrature is involved.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dirlin/errors.hpp"
#include "dirlin/matrix.hpp"
#include "dirlin/optim.hpp"
#include "dirlin/sample.hpp"
#include "dirlin/special.hpp"
#include "dirlin/unit_vector.hpp"

namespace dirlin {

// Pairwise tables shared by the CV objectives and the test statistic:
// dots(i,j) = x_i . x_j and zdiff(i,j) = z_i - z_j. Built once per sample.
struct PairTables {
  int q = 0;
  std::size_t n = 0;
  Matrix dots;
  Matrix zdiff;
};

inline PairTables make_pair_tables(const DirLinSample& s) {
  const std::size_t n = s.size();
  PairTables t;
  t.q = s.q();
  t.n = n;
  t.dots = Matrix(n, n);
  t.zdiff = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    t.dots(i, i) = 1.0;
    t.zdiff(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::clamp(dot(s.x[i], s.x[j]), -1.0, 1.0);
      t.dots(i, j) = d;
      t.dots(j, i) = d;
      const double dz = s.z[i] - s.z[j];
      t.zdiff(i, j) = dz;
      t.zdiff(j, i) = -dz;
    }
  }
  return t;
}

inline double kde_linear(const std::vector<double>& zs, double g, double z) {
  if (zs.empty()) throw DomainError("kde_linear: empty sample");
  if (!(g > 0)) throw DomainError("kde_linear: bandwidth must be positive");
  double acc = 0.0;
  for (double zi : zs) acc += normal_pdf(z, zi, g);
  return acc / static_cast<double>(zs.size());
}

inline double kde_directional(const std::vector<UnitVector>& xs, double h, const UnitVector& x) {
  if (xs.empty()) throw DomainError("kde_directional: empty sample");
  if (!(h > 0)) throw DomainError("kde_directional: bandwidth must be positive");
  const int q = x.q();
  const double lchq = log_chq(q, h);
  const double inv_h2 = 1.0 / (h * h);
  double acc = 0.0;
  for (const auto& xi : xs) {
    const double d = dot(x, xi);
    acc += std::exp(lchq - (1.0 - d) * inv_h2);
  }
  return acc / static_cast<double>(xs.size());
}

inline double kde_dirlin(const DirLinSample& s, const BandwidthPair& bw, const UnitVector& x,
                         double z) {
  if (s.size() == 0) throw DomainError("kde_dirlin: empty sample");
  if (!(bw.h > 0 && bw.g > 0)) throw DomainError("kde_dirlin: bandwidths must be positive");
  const int q = x.q();
  const double lchq = log_chq(q, bw.h);
  const double inv_h2 = 1.0 / (bw.h * bw.h);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = dot(x, s.x[i]);
    acc += std::exp(lchq - (1.0 - d) * inv_h2) * normal_pdf(z, s.z[i], bw.g);
  }
  return acc / static_cast<double>(s.size());
}

namespace detail {

// Directional Gram matrix: Psi(h)_ij is the spherical convolution of the
// kernels centered at x_i and x_j, exp(2 log C_q(1/h^2) - log C_q(r/h^2))
// with r = |x_i + x_j| = sqrt(2 + 2 x_i.x_j). The formula covers the
// diagonal (r = 2) with no special case.
inline Matrix psi_gram(const Matrix& dots, int q, double h) {
  const std::size_t n = dots.rows();
  const double inv_h2 = 1.0 / (h * h);
  const double lc = log_cq(q, inv_h2);
  Matrix psi(n, n);
  const double diag = std::exp(2.0 * lc - log_cq(q, 2.0 * inv_h2));
  for (std::size_t i = 0; i < n; ++i) {
    psi(i, i) = diag;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = std::sqrt(std::max(0.0, 2.0 + 2.0 * dots(i, j)));
      const double v = std::exp(2.0 * lc - log_cq(q, r * inv_h2));
      psi(i, j) = v;
      psi(j, i) = v;
    }
  }
  return psi;
}

// Linear Gram matrix: Omega(g)_ij = phi(z_i - z_j; 0, sqrt(2) g), the
// Gaussian convolution of the kernels at z_i and z_j.
inline Matrix omega_gram(const Matrix& zdiff, double g) {
  const std::size_t n = zdiff.rows();
  const double sg = std::sqrt(2.0) * g;
  Matrix omega(n, n);
  const double diag = normal_pdf(0.0, 0.0, sg);
  for (std::size_t i = 0; i < n; ++i) {
    omega(i, i) = diag;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = normal_pdf(zdiff(i, j), 0.0, sg);
      omega(i, j) = v;
      omega(j, i) = v;
    }
  }
  return omega;
}

// Leave-one-out kernel sums: out[i] = sum_{j != i} K_h(x_i, x_j) K_g(z_i, z_j).
inline void loo_sums(const PairTables& t, double h, double g, std::vector<double>& out) {
  const std::size_t n = t.n;
  const double lchq = log_chq(t.q, h);
  const double inv_h2 = 1.0 / (h * h);
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* drow = t.dots.row(i);
    const double* zrow = t.zdiff.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      acc += std::exp(lchq - (1.0 - drow[j]) * inv_h2) * normal_pdf(zrow[j], 0.0, g);
    }
    out[i] = acc;
  }
}

// LCV without the error contract: -inf when a leave-one-out density is zero,
// so grid cells with vanishing likelihood are skipped rather than fatal.
inline double lcv_quiet(const PairTables& t, double h, double g) {
  std::vector<double> s;
  loo_sums(t, h, g, s);
  const double denom = static_cast<double>(t.n - 1);
  double obj = 0.0;
  for (double si : s) {
    if (!(si > 0)) return -std::numeric_limits<double>::infinity();
    obj += std::log(si / denom);
  }
  return obj;
}

inline double lscv_quiet(const PairTables& t, double h, double g) {
  std::vector<double> s;
  loo_sums(t, h, g, s);
  const double n = static_cast<double>(t.n);
  double loo_term = 0.0;
  for (double si : s) loo_term += si;
  loo_term *= 2.0 / (n * (n - 1.0));

  const Matrix psi = psi_gram(t.dots, t.q, h);
  const Matrix omega = omega_gram(t.zdiff, g);
  double rough = 0.0;
  for (std::size_t i = 0; i < t.n; ++i) {
    const double* pr = psi.row(i);
    const double* orow = omega.row(i);
    for (std::size_t j = 0; j < t.n; ++j) rough += pr[j] * orow[j];
  }
  rough /= n * n;
  return loo_term - rough;
}

inline void require_cv_args(const DirLinSample& s, const BandwidthPair& bw) {
  if (s.size() < 2) throw DomainError("cross-validation needs n >= 2");
  if (!(bw.h > 0 && bw.g > 0)) throw DomainError("bandwidths must be positive");
}

}  // namespace detail

// Log-likelihood of the leave-one-out estimator, sum_i log f^{-i}(x_i, z_i).
// Throws NonFiniteObjective when a leave-one-out density underflows to zero.
inline double lcv_objective(const DirLinSample& s, const BandwidthPair& bw) {
  detail::require_cv_args(s, bw);
  const auto t = make_pair_tables(s);
  const double v = detail::lcv_quiet(t, bw.h, bw.g);
  if (!std::isfinite(v))
    throw NonFiniteObjective("lcv_objective: leave-one-out density is zero");
  return v;
}

// Least-squares score 2 n^{-1} sum_i f^{-i}(x_i, z_i) - integral of the
// squared estimator, the latter in closed Gram form. Larger is better.
inline double lscv_objective(const DirLinSample& s, const BandwidthPair& bw) {
  detail::require_cv_args(s, bw);
  const auto t = make_pair_tables(s);
  return detail::lscv_quiet(t, bw.h, bw.g);
}

enum class CvObjective { lcv, lscv };

// Maximize the chosen cross-validation score over a log-spaced 20x20 grid,
// h in [0.05, 5] and g in [0.05, 5] times the sample standard deviation of
// z, then polish with Nelder-Mead from the best cell. Cells where the score
// is non-finite are skipped; the search fails only if every cell does.
// Warnings (grid widening at an edge) are appended to *warnings when given.
inline BandwidthPair select_cv_bandwidths(const DirLinSample& s, CvObjective objective,
                                          std::vector<std::string>* warnings = nullptr) {
  if (s.size() < 2) throw DomainError("select_cv_bandwidths: need n >= 2");
  const double sd = sample_sd(s.z);
  if (!(sd > 0)) throw DegenerateData("select_cv_bandwidths: constant linear responses");
  const auto t = make_pair_tables(s);
  GridSpec grid;
  grid.h_lo = 0.05;
  grid.h_hi = 5.0;
  grid.g_lo = 0.05 * sd;
  grid.g_hi = 5.0 * sd;
  auto fn = [&](double h, double g) {
    return objective == CvObjective::lcv ? detail::lcv_quiet(t, h, g)
                                         : detail::lscv_quiet(t, h, g);
  };
  OptimResult r = grid_maximize(fn, grid);
  if (warnings)
    warnings->insert(warnings->end(), r.warnings.begin(), r.warnings.end());
  return BandwidthPair{r.h, r.g};
}

}  // namespace dirlin
