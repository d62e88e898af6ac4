#pragma once
// Quadrature rules for the three domains the estimators integrate over:
// the circle (equispaced trapezoid, exact for trigonometric polynomials of
// degree < N), the sphere (Gauss-Legendre in the polar cosine times a
// trapezoid in azimuth), and a finite window of the real line (composite
// 16-point Gauss-Legendre panels).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "dirlin/errors.hpp"
#include "dirlin/special.hpp"

namespace dirlin {

enum class Domain { circle, sphere, real_line };

struct QuadratureRule {
  Domain domain = Domain::circle;
  int point_dim = 2;            // 2 on S^1, 3 on S^2, 1 on the line
  std::vector<double> nodes;    // flattened, point_dim doubles per node
  std::vector<double> weights;
  double window_lo = 0.0;       // line rules only
  double window_hi = 0.0;
  double ref_mean = 0.0;        // declared reference Gaussian (line rules)
  double ref_sd = 1.0;

  std::size_t size() const { return weights.size(); }
  const double* node(std::size_t i) const { return nodes.data() + point_dim * i; }
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_k.
inline void gauss_legendre(int k, std::vector<double>& x, std::vector<double>& w) {
  x.assign(k, 0.0);
  w.assign(k, 0.0);
  const int m = (k + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < k; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = k * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[k - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[k - 1 - i] = w[i];
  }
}

}  // namespace detail

inline QuadratureRule make_circle_quadrature(int nodes) {
  if (nodes < 16) throw DomainError("make_quadrature: circle rule needs >= 16 nodes");
  QuadratureRule r;
  r.domain = Domain::circle;
  r.point_dim = 2;
  r.nodes.resize(2 * static_cast<std::size_t>(nodes));
  r.weights.assign(nodes, 2.0 * std::numbers::pi / nodes);
  for (int i = 0; i < nodes; ++i) {
    const double t = 2.0 * std::numbers::pi * i / nodes;
    r.nodes[2 * i] = std::cos(t);
    r.nodes[2 * i + 1] = std::sin(t);
  }
  return r;
}

inline QuadratureRule make_sphere_quadrature(int polar, int azimuth) {
  if (polar < 8 || azimuth < 16)
    throw DomainError("make_quadrature: sphere rule needs >= 8x16 nodes");
  QuadratureRule r;
  r.domain = Domain::sphere;
  r.point_dim = 3;
  std::vector<double> u, wu;
  detail::gauss_legendre(polar, u, wu);
  r.nodes.reserve(3 * static_cast<std::size_t>(polar) * azimuth);
  r.weights.reserve(static_cast<std::size_t>(polar) * azimuth);
  const double waz = 2.0 * std::numbers::pi / azimuth;
  for (int i = 0; i < polar; ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - u[i] * u[i]));
    for (int j = 0; j < azimuth; ++j) {
      const double t = 2.0 * std::numbers::pi * j / azimuth;
      r.nodes.push_back(s * std::cos(t));
      r.nodes.push_back(s * std::sin(t));
      r.nodes.push_back(u[i]);
      r.weights.push_back(wu[i] * waz);
    }
  }
  return r;
}

// Composite 16-point Gauss-Legendre panels over [lo, hi]. The declared
// reference Gaussian must integrate to 1 within 1e-10 under the rule; by
// default it is centered in the window with sd = width/16, so the window
// spans +-8 sd.
inline QuadratureRule make_line_quadrature(int nodes, double lo, double hi,
                                           double ref_mean, double ref_sd) {
  if (nodes < 64) throw DomainError("make_quadrature: line rule needs >= 64 nodes");
  if (!(hi > lo)) throw DomainError("make_quadrature: empty line window");
  if (!(ref_sd > 0)) throw DomainError("make_quadrature: reference sd must be positive");
  QuadratureRule r;
  r.domain = Domain::real_line;
  r.point_dim = 1;
  r.window_lo = lo;
  r.window_hi = hi;
  r.ref_mean = ref_mean;
  r.ref_sd = ref_sd;
  const int panels = (nodes + 15) / 16;
  static const auto gl16 = [] {
    std::pair<std::vector<double>, std::vector<double>> p;
    detail::gauss_legendre(16, p.first, p.second);
    return p;
  }();
  const double width = (hi - lo) / panels;
  double mass = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double c = a + 0.5 * width;
    for (int j = 0; j < 16; ++j) {
      const double z = c + 0.5 * width * gl16.first[j];
      const double wt = 0.5 * width * gl16.second[j];
      r.nodes.push_back(z);
      r.weights.push_back(wt);
      mass += wt * normal_pdf(z, ref_mean, ref_sd);
    }
  }
  if (std::abs(mass - 1.0) > 1e-10)
    throw DomainError("make_quadrature: line window does not cover the reference Gaussian");
  return r;
}

inline QuadratureRule make_line_quadrature(int nodes, double lo, double hi) {
  return make_line_quadrature(nodes, lo, hi, 0.5 * (lo + hi), (hi - lo) / 16.0);
}

inline QuadratureRule make_quadrature(Domain domain, int resolution) {
  switch (domain) {
    case Domain::circle:
      return make_circle_quadrature(resolution);
    case Domain::sphere:
      return make_sphere_quadrature(resolution, 2 * resolution);
    case Domain::real_line:
      return make_line_quadrature(resolution, -8.0, 8.0, 0.0, 1.0);
  }
  throw DomainError("make_quadrature: unsupported domain");
}

inline QuadratureRule make_quadrature(Domain domain, int res_a, int res_b) {
  if (domain != Domain::sphere)
    throw DomainError("make_quadrature: two-part resolution is for the sphere rule");
  return make_sphere_quadrature(res_a, res_b);
}

// Rule over the unit sphere S^q (q = 1 or 2) at a resolution adequate for
// integrands with effective concentration kappa_eff.
inline QuadratureRule make_sphere_rule_for(int q, double kappa_eff) {
  if (q == 1) {
    const int n = static_cast<int>(
        std::ceil(kappa_eff + 9.0 * std::cbrt(std::max(kappa_eff, 0.0)) + 40.0));
    return make_circle_quadrature(std::clamp(n, 64, 2048));
  }
  if (q == 2) {
    const int p = static_cast<int>(
        std::ceil(0.5 * (kappa_eff + 12.0 * std::sqrt(std::max(kappa_eff, 0.0)) + 30.0)));
    const int polar = std::clamp(p, 24, 160);
    return make_sphere_quadrature(polar, 2 * polar);
  }
  throw DomainError("make_sphere_rule_for: quadrature supports q in {1, 2}");
}

}  // namespace dirlin
