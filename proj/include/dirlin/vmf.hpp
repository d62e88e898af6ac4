#pragma once
// von Mises-Fisher distributions on S^q: density, mixtures, and exact
// sampling. Sampling uses the tangent-normal decomposition: the polar cosine
// W is drawn by Wood's envelope-rejection scheme (valid for every q >= 1 and
// kappa >= 0), the tangential part is uniform on S^{q-1}, and the result is
// reflected from the north pole onto the requested mean direction.

#include <cmath>
#include <utility>
#include <vector>

#include "dirlin/errors.hpp"
#include "dirlin/rng.hpp"
#include "dirlin/special.hpp"
#include "dirlin/unit_vector.hpp"

namespace dirlin {

struct VonMisesFisher {
  UnitVector mu;
  double kappa = 0.0;
};

inline VonMisesFisher make_vmf(UnitVector mu, double kappa) {
  if (!(kappa >= 0)) throw DomainError("make_vmf: kappa must be nonnegative");
  return VonMisesFisher{std::move(mu), kappa};
}

inline double vmf_density(const VonMisesFisher& d, const UnitVector& x) {
  if (d.mu.dim() != x.dim()) throw DomainError("vmf_density: dimension mismatch");
  return std::exp(log_cq(x.q(), d.kappa) + d.kappa * dot(x, d.mu));
}

struct VmfMixture {
  struct Component {
    double weight;
    VonMisesFisher vmf;
  };
  std::vector<Component> components;
};

inline VmfMixture make_vmf_mixture(std::vector<VmfMixture::Component> components) {
  if (components.empty()) throw DomainError("make_vmf_mixture: no components");
  double total = 0.0;
  const int dim = components.front().vmf.mu.dim();
  for (const auto& c : components) {
    if (!(c.weight >= 0)) throw DomainError("make_vmf_mixture: negative weight");
    if (c.vmf.mu.dim() != dim) throw DomainError("make_vmf_mixture: mixed dimensions");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DomainError("make_vmf_mixture: weights must sum to 1");
  return VmfMixture{std::move(components)};
}

inline double vmf_mixture_density(const VmfMixture& m, const UnitVector& x) {
  double s = 0.0;
  for (const auto& c : m.components) s += c.weight * vmf_density(c.vmf, x);
  return s;
}

namespace detail {

inline std::vector<double> uniform_sphere_coords(int dim, Rng& rng) {
  std::vector<double> v(dim);
  for (;;) {
    double n2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      v[i] = rng.normal();
      n2 += v[i] * v[i];
    }
    if (n2 > 0) {
      const double inv = 1.0 / std::sqrt(n2);
      for (double& c : v) c *= inv;
      return v;
    }
  }
}

// Symmetric Beta((m-1)/2, (m-1)/2) used inside Wood's scheme; m is the
// ambient dimension q+1.
inline double symmetric_beta(int m, Rng& rng) {
  if (m == 2) {
    const double s = std::sin(0.5 * std::numbers::pi * rng.uniform());
    return s * s;
  }
  if (m == 3) return rng.uniform();
  const double a = 0.5 * (m - 1);
  const double g1 = rng.gamma(a);
  const double g2 = rng.gamma(a);
  return g1 / (g1 + g2);
}

}  // namespace detail

inline UnitVector vmf_sample_one(const VonMisesFisher& d, Rng& rng) {
  const int m = d.mu.dim();
  const int q = m - 1;
  const double kappa = d.kappa;
  if (kappa == 0.0) return UnitVector{detail::uniform_sphere_coords(m, rng)};

  // b in the numerically stable form (no cancellation for large kappa).
  const double b = (m - 1) / (std::sqrt(4.0 * kappa * kappa + (m - 1.0) * (m - 1.0)) + 2.0 * kappa);
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + (m - 1) * std::log(1.0 - x0 * x0);
  double w = 0.0;
  for (;;) {
    const double zb = detail::symmetric_beta(m, rng);
    w = (1.0 - (1.0 + b) * zb) / (1.0 - (1.0 - b) * zb);
    const double u = rng.uniform_pos();
    if (kappa * w + (m - 1) * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }

  const std::vector<double> v = detail::uniform_sphere_coords(q, rng);
  std::vector<double> y(m);
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  for (int i = 0; i < q; ++i) y[i] = s * v[i];
  y[q] = w;

  // Reflect the north pole onto mu with the Householder map H = I - 2 uu'.
  std::vector<double> u(m);
  double un2 = 0.0;
  for (int i = 0; i < m; ++i) {
    u[i] = (i == q ? 1.0 : 0.0) - d.mu.coords[i];
    un2 += u[i] * u[i];
  }
  if (un2 > 1e-24) {
    double uy = 0.0;
    for (int i = 0; i < m; ++i) uy += u[i] * y[i];
    const double f = 2.0 * uy / un2;
    for (int i = 0; i < m; ++i) y[i] -= f * u[i];
  }
  return UnitVector{std::move(y)};
}

inline std::vector<UnitVector> vmf_sample(const VonMisesFisher& d, std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("vmf_sample: n must be positive");
  std::vector<UnitVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(vmf_sample_one(d, rng));
  return out;
}

inline UnitVector vmf_mixture_sample_one(const VmfMixture& mix, Rng& rng) {
  double u = rng.uniform();
  for (const auto& c : mix.components) {
    if (u < c.weight) return vmf_sample_one(c.vmf, rng);
    u -= c.weight;
  }
  return vmf_sample_one(mix.components.back().vmf, rng);
}

}  // namespace dirlin
