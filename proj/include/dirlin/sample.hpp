#pragma once
// Paired directional-linear observations: unit vectors x_i on S^q alongside
// real responses z_i. make_sample validates shape once so downstream code can
// assume a rectangular, normalized sample.

#include <cmath>
#include <cstddef>
#include <vector>

#include "dirlin/errors.hpp"
#include "dirlin/unit_vector.hpp"

namespace dirlin {

struct DirLinSample {
  std::vector<UnitVector> x;  // points on S^q, all the same dimension
  std::vector<double> z;      // linear responses, paired with x

  std::size_t size() const { return z.size(); }
  int q() const { return x.empty() ? 0 : x.front().q(); }
  int dim() const { return x.empty() ? 0 : x.front().dim(); }
};

struct BandwidthPair {
  double h = 0.0;  // directional bandwidth, > 0
  double g = 0.0;  // linear bandwidth, > 0
};

inline DirLinSample make_sample(std::vector<UnitVector> x, std::vector<double> z) {
  if (x.size() != z.size()) throw DomainError("make_sample: x and z lengths differ");
  if (x.empty()) throw DomainError("make_sample: empty sample");
  const int dim = x.front().dim();
  for (const auto& v : x)
    if (v.dim() != dim) throw DomainError("make_sample: mixed sphere dimensions");
  return DirLinSample{std::move(x), std::move(z)};
}

// Sample standard deviation with the n-1 divisor; 0 for n < 2.
inline double sample_sd(const std::vector<double>& z) {
  const std::size_t n = z.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

// Mean resultant length of the directional part.
inline double mean_resultant_length(const std::vector<UnitVector>& x) {
  if (x.empty()) throw DomainError("mean_resultant_length: empty sample");
  const int dim = x.front().dim();
  std::vector<double> m(dim, 0.0);
  for (const auto& v : x)
    for (int k = 0; k < dim; ++k) m[k] += v[k];
  double n2 = 0.0;
  for (double c : m) n2 += c * c;
  return std::sqrt(n2) / static_cast<double>(x.size());
}

}  // namespace dirlin
