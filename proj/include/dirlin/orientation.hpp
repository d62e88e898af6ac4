#pragma once
// Axial orientations and their embedding as directional data. A planar axis
// angle theta in [0, pi) doubles to the circle point (cos 2theta, sin 2theta);
// a 3-D orientation (theta, phi) lands on the upper hemisphere of S^2, with
// phi = pi/2 for a flat axis (equator) and phi = 0 for a vertical one (pole).
// pca_orientation extracts the dominant principal axis of a vertex cloud via
// the closed-form 2x2 / 3x3 symmetric eigendecomposition.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "dirlin/errors.hpp"
#include "dirlin/unit_vector.hpp"

namespace dirlin {

struct AxialOrientation {
  double theta = 0.0;                // in [0, pi)
  std::optional<double> phi;         // in [0, pi/2], present for 3-D orientations
};

inline double wrap_axial_angle(double t) {
  double r = std::fmod(t, std::numbers::pi);
  if (r < 0) r += std::numbers::pi;
  if (r >= std::numbers::pi) r = 0.0;  // guard fmod rounding at the seam
  return r;
}

inline AxialOrientation make_axial(double theta, std::optional<double> phi = std::nullopt) {
  if (!(theta >= 0 && theta < std::numbers::pi))
    throw DomainError("make_axial: theta must lie in [0, pi)");
  if (phi && !(*phi >= 0 && *phi <= 0.5 * std::numbers::pi + 1e-12))
    throw DomainError("make_axial: phi must lie in [0, pi/2]");
  return AxialOrientation{theta, phi};
}

inline UnitVector encode_axial(const AxialOrientation& a) {
  const double c = std::cos(2.0 * a.theta);
  const double s = std::sin(2.0 * a.theta);
  if (!a.phi) return UnitVector{{c, s}};
  const double sp = std::sin(*a.phi);
  const double cp = std::cos(*a.phi);
  return normalized({sp * c, sp * s, cp});
}

namespace detail {

struct Basis3 {
  std::array<double, 3> v;  // unit top eigenvector
};

// Largest-eigenvalue eigenvector of a symmetric 2x2 [[a,b],[b,c]].
// Throws DegenerateOrientation when the two eigenvalues agree within
// relative 1e-9 (no preferred axis).
inline std::array<double, 2> top_axis_2x2(double a, double b, double c) {
  const double tr = a + c;
  const double disc = std::sqrt((a - c) * (a - c) + 4.0 * b * b);
  const double l1 = 0.5 * (tr + disc);
  const double scale = std::max({std::abs(l1), std::abs(0.5 * (tr - disc)), 1e-300});
  if (disc <= 1e-9 * scale)
    throw DegenerateOrientation("pca_orientation: top eigenvalues coincide");
  // (b, l1-a) and (l1-c, b) are both eigenvectors; pick the longer one.
  const std::array<double, 2> v1{b, l1 - a};
  const std::array<double, 2> v2{l1 - c, b};
  const double n1 = v1[0] * v1[0] + v1[1] * v1[1];
  const double n2 = v2[0] * v2[0] + v2[1] * v2[1];
  std::array<double, 2> v = n1 >= n2 ? v1 : v2;
  const double n = std::sqrt(std::max(n1, n2));
  if (!(n > 0)) throw DegenerateOrientation("pca_orientation: isotropic covariance");
  return {v[0] / n, v[1] / n};
}

// Eigenvalues of a symmetric 3x3 by the trigonometric method, descending.
inline std::array<double, 3> eig_sym_3x3(const std::array<std::array<double, 3>, 3>& A) {
  const double p1 = A[0][1] * A[0][1] + A[0][2] * A[0][2] + A[1][2] * A[1][2];
  if (p1 == 0.0) {
    std::array<double, 3> d{A[0][0], A[1][1], A[2][2]};
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
  }
  const double qm = (A[0][0] + A[1][1] + A[2][2]) / 3.0;
  const double p2 = (A[0][0] - qm) * (A[0][0] - qm) + (A[1][1] - qm) * (A[1][1] - qm) +
                    (A[2][2] - qm) * (A[2][2] - qm) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  std::array<std::array<double, 3>, 3> B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) B[i][j] = (A[i][j] - (i == j ? qm : 0.0)) / p;
  const double detB = B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1]) -
                      B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0]) +
                      B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]);
  const double r = std::clamp(0.5 * detB, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double l1 = qm + 2.0 * p * std::cos(phi);
  const double l3 = qm + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double l2 = 3.0 * qm - l1 - l3;
  return {l1, l2, l3};
}

// Unit eigenvector for eigenvalue l of symmetric A, via the largest cross
// product of rows of (A - l I).
inline std::array<double, 3> eigvec_3x3(const std::array<std::array<double, 3>, 3>& A, double l) {
  std::array<std::array<double, 3>, 3> M = A;
  for (int i = 0; i < 3; ++i) M[i][i] -= l;
  auto cross = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::array<double, 3>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                                 a[0] * b[1] - a[1] * b[0]};
  };
  std::array<double, 3> best{0, 0, 0};
  double best_n2 = 0.0;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& pr : pairs) {
    const auto c = cross(M[pr[0]], M[pr[1]]);
    const double n2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
    if (n2 > best_n2) {
      best_n2 = n2;
      best = c;
    }
  }
  if (!(best_n2 > 0))
    throw DegenerateOrientation("pca_orientation: eigenvector not identifiable");
  const double n = std::sqrt(best_n2);
  return {best[0] / n, best[1] / n, best[2] / n};
}

}  // namespace detail

// Dominant principal axis of a vertex cloud, as an axial orientation.
// dims = 2 uses the first two coordinates; dims = 3 also uses the third and
// reports the inclination phi. The axis has no sign, so theta is reported
// modulo pi. Throws DegenerateOrientation when the top two eigenvalues of
// the vertex covariance agree within relative 1e-9.
inline AxialOrientation pca_orientation(const std::vector<std::array<double, 3>>& vertices,
                                        int dims) {
  if (dims != 2 && dims != 3) throw DomainError("pca_orientation: dims must be 2 or 3");
  const std::size_t n = vertices.size();
  if (n < 2) throw DegenerateOrientation("pca_orientation: need at least 2 vertices");
  std::array<double, 3> mean{0, 0, 0};
  for (const auto& v : vertices)
    for (int k = 0; k < dims; ++k) mean[k] += v[k];
  for (int k = 0; k < dims; ++k) mean[k] /= static_cast<double>(n);

  if (dims == 2) {
    double a = 0, b = 0, c = 0;
    for (const auto& v : vertices) {
      const double x = v[0] - mean[0];
      const double y = v[1] - mean[1];
      a += x * x;
      b += x * y;
      c += y * y;
    }
    const auto axis = detail::top_axis_2x2(a, b, c);
    return AxialOrientation{wrap_axial_angle(std::atan2(axis[1], axis[0])), std::nullopt};
  }

  std::array<std::array<double, 3>, 3> A{};
  for (const auto& v : vertices) {
    const double d0 = v[0] - mean[0], d1 = v[1] - mean[1], d2 = v[2] - mean[2];
    A[0][0] += d0 * d0;
    A[0][1] += d0 * d1;
    A[0][2] += d0 * d2;
    A[1][1] += d1 * d1;
    A[1][2] += d1 * d2;
    A[2][2] += d2 * d2;
  }
  A[1][0] = A[0][1];
  A[2][0] = A[0][2];
  A[2][1] = A[1][2];
  const auto ev = detail::eig_sym_3x3(A);
  const double scale = std::max(std::abs(ev[0]), 1e-300);
  if (ev[0] - ev[1] <= 1e-9 * scale)
    throw DegenerateOrientation("pca_orientation: top eigenvalues coincide");
  const auto v = detail::eigvec_3x3(A, ev[0]);
  const double theta = wrap_axial_angle(std::atan2(v[1], v[0]));
  const double phi = std::clamp(std::acos(std::min(1.0, std::abs(v[2]))), 0.0,
                                0.5 * std::numbers::pi);
  return AxialOrientation{theta, phi};
}

}  // namespace dirlin
