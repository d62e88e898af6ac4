#pragma once
// Modified Bessel functions of the first kind and the von Mises-Fisher
// normalizing constant C_q, all in log space. Two regimes:
//
//   z < 20   ascending series on log(I_nu(z)/z^nu), which stays finite as
//            z -> 0 and is what C_q actually needs,
//   z >= 20  the exponentially scaled asymptotic expansion of e^{-z} I_nu(z),
//            truncated at its smallest term. The neglected reflection part
//            is O(e^{-2z}), i.e. below 1e-17 on the whole branch.
//
// Concentrations up to kappa = 1e6 (bandwidths down to 1e-3) therefore never
// overflow, and ratios such as C_q(1/h^2)^2 / C_q(s/h^2) are formed by
// exponentiating differences of the log values.

#include <cmath>
#include <limits>
#include <numbers>

#include "dirlin/errors.hpp"

namespace dirlin {

namespace detail {

// log of the series sum of I_nu(z)/z^nu * 2^nu, i.e. sum_k (z^2/4)^k / (k! Gamma(nu+k+1)).
inline double bessel_ratio_series_logsum(double nu, double z) {
  const double x = 0.25 * z * z;
  double term = std::exp(-std::lgamma(nu + 1.0));
  double sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= x / (k * (nu + k));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return std::log(sum);
}

// log(e^{-z} I_nu(z)) for z >= 20.
inline double log_bessel_scaled_asym(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    const double odd = 2.0 * k + 1.0;
    term *= -(mu - odd * odd) / (8.0 * (k + 1) * z);
    if (std::abs(term) >= prev) break;  // past the smallest term; stop
    sum += term;
    prev = std::abs(term);
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return -0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(sum);
}

inline void check_bessel_args(double nu, double z) {
  if (!(nu >= 0)) throw DomainError("log_bessel_i: order must be nonnegative");
  if (!(z >= 0)) throw DomainError("log_bessel_i: argument must be nonnegative");
}

}  // namespace detail

// log(I_nu(z) / z^nu); finite for all z >= 0, including z = 0.
inline double log_bessel_ratio(double nu, double z) {
  detail::check_bessel_args(nu, z);
  if (z < 20.0)
    return -nu * std::numbers::ln2 + detail::bessel_ratio_series_logsum(nu, z);
  return detail::log_bessel_scaled_asym(nu, z) + z - nu * std::log(z);
}

inline double log_bessel_i(double nu, double z) {
  detail::check_bessel_args(nu, z);
  if (z == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (z < 20.0) return log_bessel_ratio(nu, z) + nu * std::log(z);
  return detail::log_bessel_scaled_asym(nu, z) + z;
}

// log(e^{-z} I_nu(z)); never overflows for large z.
inline double log_bessel_i_scaled(double nu, double z) {
  detail::check_bessel_args(nu, z);
  if (z >= 20.0) return detail::log_bessel_scaled_asym(nu, z);
  return log_bessel_i(nu, z) - z;
}

// Mean resultant length of a vMF(mu, kappa) on the sphere S^q:
// A_q(kappa) = I_{(q+1)/2}(kappa) / I_{(q-1)/2}(kappa).
inline double bessel_a_q(int q, double kappa) {
  if (q < 1) throw DomainError("bessel_a_q: q must be >= 1");
  if (!(kappa >= 0)) throw DomainError("bessel_a_q: kappa must be nonnegative");
  if (kappa == 0.0) return 0.0;
  const double nu = 0.5 * (q - 1);
  return std::exp(log_bessel_ratio(nu + 1.0, kappa) - log_bessel_ratio(nu, kappa) +
                  std::log(kappa));
}

// log C_q(kappa) with C_q(kappa) = kappa^{(q-1)/2} / ((2 pi)^{(q+1)/2} I_{(q-1)/2}(kappa)).
// The kappa^{(q-1)/2} factor cancels inside log_bessel_ratio, so kappa = 0
// (the uniform density) and near-zero arguments from almost antipodal pairs
// are exact limits rather than 0/0.
inline double log_cq(int q, double kappa) {
  if (q < 1) throw DomainError("log_cq: q must be >= 1");
  if (!(kappa >= 0)) throw DomainError("log_cq: kappa must be nonnegative");
  const double nu = 0.5 * (q - 1);
  return -(nu + 1.0) * std::log(2.0 * std::numbers::pi) - log_bessel_ratio(nu, kappa);
}

// log of the directional kernel normalizer c_{h,q} = C_q(1/h^2) e^{1/h^2},
// computed without ever forming e^{1/h^2}.
inline double log_chq(int q, double h) {
  if (q < 1) throw DomainError("log_chq: q must be >= 1");
  if (!(h > 0)) throw DomainError("log_chq: h must be positive");
  const double kappa = 1.0 / (h * h);
  const double nu = 0.5 * (q - 1);
  if (kappa < 20.0) return log_cq(q, kappa) + kappa;
  return -(nu + 1.0) * std::log(2.0 * std::numbers::pi) -
         (detail::log_bessel_scaled_asym(nu, kappa) - nu * std::log(kappa));
}

inline double normal_pdf(double x, double mean, double sd) {
  if (!(sd > 0)) throw DomainError("normal_pdf: sd must be positive");
  const double t = (x - mean) / sd;
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi / sd * std::exp(-0.5 * t * t);
}

inline double lognormal_pdf(double z, double log_scale, double shape) {
  if (!(shape > 0)) throw DomainError("lognormal_pdf: shape must be positive");
  if (z <= 0.0) return 0.0;
  return normal_pdf(std::log(z), log_scale, shape) / z;
}

}  // namespace dirlin
