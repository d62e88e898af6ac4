#pragma once
// Pilot bandwidths and the exact smoothed-bootstrap MISE surface.
//
// The pilot pair (h_p, g_p) oversmooths on purpose: h_p comes from a von
// Mises-Fisher rule of thumb rescaled from order n^{-1/(4+q)} to
// n^{-1/(6+q)}, and g_p from the normal-reference rule rescaled from
// n^{-1/5} to n^{-1/7}. Given pilots, MISE*(h, g) of the kernel estimator
// fitted to a smoothed-bootstrap resample has a closed matrix form: three
// directional Gram-like matrices (one exact, two by spherical quadrature of
// a normalizer-ratio integrand) paired with three Gaussian matrices at
// inflated standard deviations sqrt(a g^2 + 2 g_p^2), a = 0, 1, 2.
//
// The quadrature integrands are assembled entirely in log space and
// exponentiated after per-column max shifts, since the normalizer ratios
// span hundreds of orders of magnitude at small bandwidths.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "dirlin/errors.hpp"
#include "dirlin/kde.hpp"
#include "dirlin/matrix.hpp"
#include "dirlin/optim.hpp"
#include "dirlin/quadrature.hpp"
#include "dirlin/sample.hpp"
#include "dirlin/special.hpp"

namespace dirlin {

struct PilotBandwidths {
  double h_p = 0.0;
  double g_p = 0.0;
  // Diagnostics from the rules that produced the pair.
  double h_amise = 0.0;
  double g_nr = 0.0;
  double kappa_hat = 0.0;
  double r_bar = 0.0;
  std::vector<std::string> warnings;
};

// Concentration kappa solving A_q(kappa) = r, the mean resultant length of
// a vMF sample, by bisection. r <= 0 maps to 0 (uniform).
inline double kappa_from_mrl(int q, double r) {
  if (q < 1) throw DomainError("kappa_from_mrl: q must be >= 1");
  if (!(r < 1.0)) throw DegenerateData("kappa_from_mrl: mean resultant length at 1");
  if (!(r > 0.0)) return 0.0;
  double lo = 0.0;
  // A_q(kappa) ~ 1 - q/(2 kappa) for large kappa, so this bracket guess
  // rarely needs more than one doubling.
  double hi = std::max(1.0, static_cast<double>(q) / (1.0 - r));
  int guard = 0;
  while (bessel_a_q(q, hi) < r) {
    hi *= 2.0;
    if (++guard > 200) throw DomainError("kappa_from_mrl: bracket failure");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_a_q(q, mid) < r)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

constexpr double rot_h_cap = 5.0;

// AMISE-optimal bandwidth under a vMF(kappa) reference density:
//   h^(4+q) = 4 sqrt(pi) I_nu(kappa)^2 /
//             (kappa^((q+1)/2) [2q I_{nu+1}(2 kappa)
//              + (2+q) kappa I_{nu+2}(2 kappa)] n),   nu = (q-1)/2,
// evaluated with exponentially scaled Bessel functions so the e^{2 kappa}
// factors cancel exactly. Returns the cap (5) for kappa near 0, where the
// rule diverges because a uniform density is best estimated flat.
inline double rot_bandwidth(int q, double kappa, std::size_t n, bool* capped = nullptr) {
  if (capped) *capped = false;
  if (n < 1) throw DomainError("rot_bandwidth: n must be >= 1");
  if (!(kappa >= 0)) throw DomainError("rot_bandwidth: kappa must be >= 0");
  if (kappa < 1e-8) {
    if (capped) *capped = true;
    return rot_h_cap;
  }
  const double nu = 0.5 * (static_cast<double>(q) - 1.0);
  const double num_log = std::log(4.0 * std::sqrt(std::numbers::pi)) +
                         2.0 * log_bessel_i_scaled(nu, kappa);
  const double t1 = 2.0 * static_cast<double>(q) * std::exp(log_bessel_i_scaled(nu + 1.0, 2.0 * kappa));
  const double t2 = (2.0 + static_cast<double>(q)) * kappa *
                    std::exp(log_bessel_i_scaled(nu + 2.0, 2.0 * kappa));
  const double den_log = 0.5 * (static_cast<double>(q) + 1.0) * std::log(kappa) +
                         std::log(t1 + t2) + std::log(static_cast<double>(n));
  const double h = std::exp((num_log - den_log) / (4.0 + static_cast<double>(q)));
  if (h > rot_h_cap) {
    if (capped) *capped = true;
    return rot_h_cap;
  }
  return h;
}

}  // namespace detail

inline PilotBandwidths pilot_bandwidths(const DirLinSample& s) {
  if (s.size() < 2) throw DomainError("pilot_bandwidths: need n >= 2");
  const int q = s.q();
  const double n = static_cast<double>(s.size());
  PilotBandwidths p;
  p.r_bar = mean_resultant_length(s.x);
  if (p.r_bar >= 1.0 - 1e-12)
    throw DegenerateData("pilot_bandwidths: all directions identical");
  const double sd = sample_sd(s.z);
  if (!(sd > 0)) throw DegenerateData("pilot_bandwidths: constant linear responses");

  p.kappa_hat = kappa_from_mrl(q, p.r_bar);
  bool capped = false;
  p.h_amise = detail::rot_bandwidth(q, p.kappa_hat, s.size(), &capped);
  if (capped)
    p.warnings.push_back("near-uniform directions: rule-of-thumb bandwidth capped at 5");
  const double qd = static_cast<double>(q);
  p.h_p = p.h_amise * std::pow(n, 1.0 / (4.0 + qd) - 1.0 / (6.0 + qd));
  p.g_nr = 1.06 * sd * std::pow(n, -0.2);
  p.g_p = p.g_nr * std::pow(n, 1.0 / 5.0 - 1.0 / 7.0);
  return p;
}

// Oversmoothing rescale applied to a cross-validated pair: bumps the orders
// from (n^{-1/(4+q)}, n^{-1/5}) to the pilot orders (n^{-1/(6+q)}, n^{-1/7}).
inline BandwidthPair mlcv_rescale(const BandwidthPair& bw, std::size_t n, int q) {
  const double nd = static_cast<double>(n);
  const double qd = static_cast<double>(q);
  return BandwidthPair{bw.h * std::pow(nd, 1.0 / (4.0 + qd) - 1.0 / (6.0 + qd)),
                       bw.g * std::pow(nd, 1.0 / 5.0 - 1.0 / 7.0)};
}

struct BootstrapGrams {
  Matrix psi0, psi1, psi2;
  Matrix omega0, omega1, omega2;
};

namespace detail {

struct PsiStarPair {
  Matrix psi1, psi2;
};

// The two quadrature-based directional matrices. With kernel normalizers
// c = C_q(1/h^2) and c_p = C_q(1/h_p^2), and A_i(x) = C_q(|x/h^2 + X_i/h_p^2|):
//   psi1_ij = Int c c_p^2 e^{x.X_j / h_p^2} / A_i(x) dx
//   psi2_ij = Int c^2 c_p^2 / (A_i(x) A_j(x)) dx
// Everything is accumulated in log space with per-column max shifts, then
// combined as a quadrature-by-sample inner product.
inline PsiStarPair psi_star_pair(const std::vector<UnitVector>& xs, double h, double h_p,
                                 const QuadratureRule& rule) {
  const std::size_t n = xs.size();
  if (n == 0) throw DomainError("psi_star_pair: empty sample");
  const int dim = xs.front().dim();
  if (rule.point_dim != dim)
    throw DomainError("psi_star_pair: quadrature domain does not match the sphere dimension");
  const int q = dim - 1;
  const std::size_t K = rule.size();

  const double inv_h2 = 1.0 / (h * h);
  const double inv_hp2 = 1.0 / (h_p * h_p);
  const double lc_h = log_cq(q, inv_h2);
  const double lc_hp = log_cq(q, inv_hp2);
  const double h4 = inv_h2 * inv_h2;
  const double hp4 = inv_hp2 * inv_hp2;
  const double cross = 2.0 * inv_h2 * inv_hp2;

  // Row-per-sample layout keeps the per-column scans and the final inner
  // products contiguous.
  std::vector<double> P(n * K), Q(n * K);
  for (std::size_t i = 0; i < n; ++i) {
    const UnitVector& xi = xs[i];
    double* prow = P.data() + i * K;
    double* qrow = Q.data() + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      const double* node = rule.node(k);
      double d = 0.0;
      for (int c = 0; c < dim; ++c) d += node[c] * xi[c];
      const double kap = std::sqrt(std::max(0.0, h4 + cross * d + hp4));
      prow[k] = lc_h + lc_hp - log_cq(q, kap);
      qrow[k] = lc_hp + d * inv_hp2;
    }
  }

  std::vector<double> m1(n), m2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* prow = P.data() + i * K;
    const double* qrow = Q.data() + i * K;
    double a = -std::numeric_limits<double>::infinity();
    double b = a;
    for (std::size_t k = 0; k < K; ++k) {
      a = std::max(a, prow[k]);
      b = std::max(b, qrow[k]);
    }
    m1[i] = a;
    m2[i] = b;
  }

  // P becomes sqrt(w_k) exp(P - m1); Q becomes exp(Q - m2).
  std::vector<double> sw(K);
  for (std::size_t k = 0; k < K; ++k) sw[k] = std::sqrt(rule.weights[k]);
  for (std::size_t i = 0; i < n; ++i) {
    double* prow = P.data() + i * K;
    double* qrow = Q.data() + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      prow[k] = sw[k] * std::exp(prow[k] - m1[i]);
      qrow[k] = std::exp(qrow[k] - m2[i]);
    }
  }

  PsiStarPair out{Matrix(n, n), Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double* fi = P.data() + i * K;
    for (std::size_t j = 0; j < n; ++j) {
      const double* ej = Q.data() + j * K;
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) acc += sw[k] * fi[k] * ej[k];
      out.psi1(i, j) = acc > 0 ? std::exp(m1[i] + m2[j] + std::log(acc)) : 0.0;
    }
    for (std::size_t j = i; j < n; ++j) {
      const double* fj = P.data() + j * K;
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) acc += fi[k] * fj[k];
      const double v = acc > 0 ? std::exp(m1[i] + m1[j] + std::log(acc)) : 0.0;
      out.psi2(i, j) = v;
      out.psi2(j, i) = v;
    }
  }
  return out;
}

// MISE*(h, g) from precomputed directional parts. First addend is the
// resampling variance floor Psi(h)_ii Omega(g)_ii / n; the bracket is the
// integrated squared bias/variance balance of the bootstrap estimator
// against the pilot estimate.
inline double mise_from_parts(const Matrix& psi0, const PsiStarPair& pp, const Matrix& zdiff,
                              int q, double h, double g, double g_p) {
  const std::size_t n = psi0.rows();
  const double nd = static_cast<double>(n);
  const double inv_h2 = 1.0 / (h * h);
  const double first = std::exp(2.0 * log_cq(q, inv_h2) - log_cq(q, 2.0 * inv_h2)) /
                       (2.0 * std::sqrt(std::numbers::pi) * g * nd);
  const double s0 = std::sqrt(2.0) * g_p;
  const double s1 = std::sqrt(g * g + 2.0 * g_p * g_p);
  const double s2 = std::sqrt(2.0 * g * g + 2.0 * g_p * g_p);
  const double w2 = 1.0 - 1.0 / nd;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* zr = zdiff.row(i);
    const double* p0 = psi0.row(i);
    const double* p1 = pp.psi1.row(i);
    const double* p2 = pp.psi2.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double dz = zr[j];
      acc += w2 * p2[j] * normal_pdf(dz, 0.0, s2) - 2.0 * p1[j] * normal_pdf(dz, 0.0, s1) +
             p0[j] * normal_pdf(dz, 0.0, s0);
    }
  }
  return first + acc / (nd * nd);
}

inline void require_pilots(const PilotBandwidths& p) {
  if (!(p.h_p > 0 && p.g_p > 0)) throw DomainError("pilot bandwidths must be positive");
}

}  // namespace detail

// All six matrices of the bootstrap MISE identity at the given resolution.
inline BootstrapGrams bootstrap_grams(const DirLinSample& s, const PilotBandwidths& pilots,
                                      const BandwidthPair& bw, const QuadratureRule& rule) {
  detail::require_pilots(pilots);
  if (!(bw.h > 0 && bw.g > 0)) throw DomainError("bootstrap_grams: bandwidths must be positive");
  const auto t = make_pair_tables(s);
  auto pp = detail::psi_star_pair(s.x, bw.h, pilots.h_p, rule);
  BootstrapGrams out;
  out.psi0 = detail::psi_gram(t.dots, t.q, pilots.h_p);
  out.psi1 = std::move(pp.psi1);
  out.psi2 = std::move(pp.psi2);
  out.omega0 = detail::omega_gram(t.zdiff, pilots.g_p);  // sd sqrt(2) g_p
  const std::size_t n = s.size();
  out.omega1 = Matrix(n, n);
  out.omega2 = Matrix(n, n);
  const double s1 = std::sqrt(bw.g * bw.g + 2.0 * pilots.g_p * pilots.g_p);
  const double s2 = std::sqrt(2.0 * bw.g * bw.g + 2.0 * pilots.g_p * pilots.g_p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      out.omega1(i, j) = normal_pdf(t.zdiff(i, j), 0.0, s1);
      out.omega2(i, j) = normal_pdf(t.zdiff(i, j), 0.0, s2);
    }
  return out;
}

inline QuadratureRule default_bootstrap_rule(int q) {
  if (q == 1) return make_circle_quadrature(64);
  if (q == 2) return make_sphere_quadrature(24, 48);
  throw DomainError("bootstrap MISE quadrature supports q = 1 and q = 2 only");
}

inline double bootstrap_mise(const DirLinSample& s, const PilotBandwidths& pilots,
                             const BandwidthPair& bw, const QuadratureRule& rule) {
  detail::require_pilots(pilots);
  if (!(bw.h > 0 && bw.g > 0)) throw DomainError("bootstrap_mise: bandwidths must be positive");
  const auto t = make_pair_tables(s);
  const Matrix psi0 = detail::psi_gram(t.dots, t.q, pilots.h_p);
  const auto pp = detail::psi_star_pair(s.x, bw.h, pilots.h_p, rule);
  return detail::mise_from_parts(psi0, pp, t.zdiff, t.q, bw.h, bw.g, pilots.g_p);
}

inline double bootstrap_mise(const DirLinSample& s, const PilotBandwidths& pilots,
                             const BandwidthPair& bw) {
  return bootstrap_mise(s, pilots, bw, default_bootstrap_rule(s.q()));
}

// Minimize MISE* over the same log grid and simplex polish used by the CV
// selectors. The quadrature resolution adapts to the largest concentration
// in play, 1/h^2 + 2/h_p^2, and the directional matrices are memoized per h
// since the grid revisits each h once per g column.
inline BandwidthPair select_bo(const DirLinSample& s, const PilotBandwidths& pilots,
                               std::vector<std::string>* warnings = nullptr) {
  detail::require_pilots(pilots);
  if (s.size() < 2) throw DomainError("select_bo: need n >= 2");
  const int q = s.q();
  if (q != 1 && q != 2)
    throw DomainError("select_bo: quadrature supports q = 1 and q = 2 only");
  const double sd = sample_sd(s.z);
  if (!(sd > 0)) throw DegenerateData("select_bo: constant linear responses");

  const auto t = make_pair_tables(s);
  const Matrix psi0 = detail::psi_gram(t.dots, q, pilots.h_p);
  const double inv_hp2 = 2.0 / (pilots.h_p * pilots.h_p);

  using Cached = std::shared_ptr<const detail::PsiStarPair>;
  std::unordered_map<std::uint64_t, Cached> memo;
  auto parts_for = [&](double h) -> Cached {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(h);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto rule = make_sphere_rule_for(q, 1.0 / (h * h) + inv_hp2);
    auto pp = std::make_shared<detail::PsiStarPair>(
        detail::psi_star_pair(s.x, h, pilots.h_p, rule));
    if (memo.size() >= 64) memo.clear();
    memo.emplace(key, pp);
    return pp;
  };

  GridSpec grid;
  grid.h_lo = 0.05;
  grid.h_hi = 5.0;
  grid.g_lo = 0.05 * sd;
  grid.g_hi = 5.0 * sd;
  auto objective = [&](double h, double g) {
    const auto pp = parts_for(h);
    return -detail::mise_from_parts(psi0, *pp, t.zdiff, q, h, g, pilots.g_p);
  };
  OptimResult r = grid_maximize(objective, grid);
  if (warnings)
    warnings->insert(warnings->end(), r.warnings.begin(), r.warnings.end());
  return BandwidthPair{r.h, r.g};
}

inline BandwidthPair select_blcv(const DirLinSample& s,
                                 std::vector<std::string>* warnings = nullptr,
                                 PilotBandwidths* pilots_out = nullptr) {
  const BandwidthPair cv = select_cv_bandwidths(s, CvObjective::lcv, warnings);
  const BandwidthPair m = mlcv_rescale(cv, s.size(), s.q());
  PilotBandwidths pilots;
  pilots.h_p = m.h;
  pilots.g_p = m.g;
  if (pilots_out) *pilots_out = pilots;
  return select_bo(s, pilots, warnings);
}

inline BandwidthPair select_blscv(const DirLinSample& s,
                                  std::vector<std::string>* warnings = nullptr,
                                  PilotBandwidths* pilots_out = nullptr) {
  const BandwidthPair cv = select_cv_bandwidths(s, CvObjective::lscv, warnings);
  const BandwidthPair m = mlcv_rescale(cv, s.size(), s.q());
  PilotBandwidths pilots;
  pilots.h_p = m.h;
  pilots.g_p = m.g;
  if (pilots_out) *pilots_out = pilots;
  return select_bo(s, pilots, warnings);
}

enum class Selector { lcv, lscv, blcv, blscv, bo, fixed, none };

inline const char* selector_name(Selector s) {
  switch (s) {
    case Selector::lcv: return "LCV";
    case Selector::lscv: return "LSCV";
    case Selector::blcv: return "BLCV";
    case Selector::blscv: return "BLSCV";
    case Selector::bo: return "BO";
    case Selector::fixed: return "fixed";
    case Selector::none: return "none";
  }
  return "unknown";
}

// One entry point for every selector that produces a bandwidth pair.
// Selector::bo derives its pilots from the rule-of-thumb pair.
inline BandwidthPair select_bandwidths(const DirLinSample& s, Selector sel,
                                       std::vector<std::string>* warnings = nullptr,
                                       PilotBandwidths* pilots_out = nullptr) {
  switch (sel) {
    case Selector::lcv:
      return select_cv_bandwidths(s, CvObjective::lcv, warnings);
    case Selector::lscv:
      return select_cv_bandwidths(s, CvObjective::lscv, warnings);
    case Selector::blcv:
      return select_blcv(s, warnings, pilots_out);
    case Selector::blscv:
      return select_blscv(s, warnings, pilots_out);
    case Selector::bo: {
      PilotBandwidths pilots = pilot_bandwidths(s);
      if (warnings)
        warnings->insert(warnings->end(), pilots.warnings.begin(), pilots.warnings.end());
      if (pilots_out) *pilots_out = pilots;
      return select_bo(s, pilots, warnings);
    }
    case Selector::fixed:
    case Selector::none:
      throw DomainError("select_bandwidths: selector does not produce bandwidths");
  }
  throw DomainError("select_bandwidths: unknown selector");
}

}  // namespace dirlin
