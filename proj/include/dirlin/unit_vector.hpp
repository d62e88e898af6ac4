#pragma once
// Points on the unit sphere S^q embedded in R^{q+1}, plus the small amount
// of vector algebra the estimators need.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "dirlin/errors.hpp"

namespace dirlin {

struct UnitVector {
  std::vector<double> coords;

  int q() const { return static_cast<int>(coords.size()) - 1; }
  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](std::size_t i) const { return coords[i]; }
};

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

// Validating constructor: the norm must already be 1 within 1e-12.
inline UnitVector make_unit_vector(std::vector<double> coords) {
  if (coords.size() < 2) throw DomainError("make_unit_vector: need at least 2 coordinates");
  if (std::abs(norm(coords) - 1.0) > 1e-12)
    throw DomainError("make_unit_vector: norm deviates from 1 beyond 1e-12");
  return UnitVector{std::move(coords)};
}

inline UnitVector normalized(std::vector<double> coords) {
  if (coords.size() < 2) throw DomainError("normalized: need at least 2 coordinates");
  const double n = norm(coords);
  if (!(n > 0)) throw DomainError("normalized: zero vector");
  for (double& c : coords) c /= n;
  return UnitVector{std::move(coords)};
}

inline double dot(const UnitVector& a, const UnitVector& b) {
  if (a.dim() != b.dim()) throw DomainError("dot: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a.coords[i] * b.coords[i];
  return s;
}

inline UnitVector circle_point(double angle) {
  return UnitVector{{std::cos(angle), std::sin(angle)}};
}

// Angle in [0, 2*pi) of a point on S^1.
inline double circle_angle(const UnitVector& x) {
  if (x.dim() != 2) throw DomainError("circle_angle: point is not on S^1");
  double a = std::atan2(x[1], x[0]);
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace dirlin
