#pragma once
// Classical circular-linear association tests, used as comparison methods:
// the Mardia/Johnson correlation R^2 between z and (cos theta, sin theta),
// and the Mardia rank statistic U_n on uniform scores. Both are calibrated
// by permuting the linear responses, so neither needs its asymptotic null
// distribution, and U_n needs no normalizing constant (positive scalings
// cancel in the permutation ranks).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "dirlin/errors.hpp"
#include "dirlin/independence.hpp"
#include "dirlin/parallel.hpp"
#include "dirlin/rng.hpp"

namespace dirlin {

namespace detail {

constexpr std::uint64_t stream_baseline = 0x62617365'6c696e65ULL;

// 1-based ranks with ties averaged.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

struct Centered {
  std::vector<double> values;  // centered
  double norm = 0.0;           // sqrt of centered sum of squares
};

inline Centered center(const std::vector<double>& v) {
  Centered c;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  c.values.reserve(v.size());
  double ss = 0.0;
  for (double x : v) {
    const double d = x - mean;
    c.values.push_back(d);
    ss += d * d;
  }
  c.norm = std::sqrt(ss);
  return c;
}

inline double corr(const Centered& a, const Centered& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * b.values[i];
  return acc / (a.norm * b.norm);
}

// Upper-tail permutation p-value of a statistic computed from a permuted z.
template <typename StatFn>
TestReport permute_upper_tail(double observed, std::size_t n, std::size_t B,
                              std::uint64_t seed, const TestOptions& opts, StatFn&& stat,
                              TestMethod method) {
  std::vector<double> permuted(B);
  parallel_for(B, opts.workers, [&](std::size_t b) {
    Rng rng(seed, {stream_baseline, b});
    const auto sigma = rng.permutation(n);
    permuted[b] = stat(sigma);
  });
  std::size_t count = 0;
  for (double t : permuted)
    if (observed <= t) ++count;
  TestReport report;
  report.statistic = observed;
  report.p_value = p_from_count(count, B, opts.add_one);
  report.method = method;
  report.B = B;
  report.selector = Selector::none;
  report.seed = seed;
  report.n = n;
  report.q = 1;
  return report;
}

}  // namespace detail

// Squared circular-linear correlation between z and the angle's embedding:
//   R^2 = (r_zc^2 + r_zs^2 - 2 r_zc r_zs r_cs) / (1 - r_cs^2).
inline TestReport baseline_r2(const std::vector<double>& thetas, const std::vector<double>& zs,
                              std::size_t B, std::uint64_t seed,
                              const TestOptions& opts = {}) {
  if (thetas.size() != zs.size()) throw DomainError("baseline_r2: length mismatch");
  const std::size_t n = zs.size();
  if (n < 3) throw DomainError("baseline_r2: need n >= 3");
  if (B < 1) throw DomainError("baseline_r2: B must be >= 1");
  std::vector<double> cosv(n), sinv(n);
  for (std::size_t i = 0; i < n; ++i) {
    cosv[i] = std::cos(thetas[i]);
    sinv[i] = std::sin(thetas[i]);
  }
  const auto zc = detail::center(zs);
  const auto cc = detail::center(cosv);
  const auto sc = detail::center(sinv);
  if (!(zc.norm > 0) || !(cc.norm > 0) || !(sc.norm > 0))
    throw DegenerateData("baseline_r2: constant correlation input");
  const double r_cs = detail::corr(cc, sc);
  const double denom = 1.0 - r_cs * r_cs;
  if (!(denom > 1e-12))
    throw DegenerateData("baseline_r2: collinear circular embedding");

  auto r2_of = [&](const std::vector<double>& z_centered) {
    double acc_c = 0.0, acc_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc_c += z_centered[i] * cc.values[i];
      acc_s += z_centered[i] * sc.values[i];
    }
    const double r_zc = acc_c / (zc.norm * cc.norm);
    const double r_zs = acc_s / (zc.norm * sc.norm);
    return (r_zc * r_zc + r_zs * r_zs - 2.0 * r_zc * r_zs * r_cs) / denom;
  };
  const double observed = r2_of(zc.values);

  auto stat = [&](const std::vector<std::size_t>& sigma) {
    std::vector<double> zp(n);
    for (std::size_t i = 0; i < n; ++i) zp[i] = zc.values[sigma[i]];
    return r2_of(zp);
  };
  return detail::permute_upper_tail(observed, n, B, seed, opts, stat,
                                    TestMethod::baseline_r2);
}

// Rank statistic on uniform scores: beta_i = 2 pi rank(theta_i)/n,
// U = T_c^2 + T_s^2 with T_c = sum r_i cos beta_i, T_s = sum r_i sin beta_i,
// r_i the rank of z_i. Unnormalized; permutation calibration absorbs any
// positive scaling.
inline TestReport baseline_rank_u(const std::vector<double>& thetas,
                                  const std::vector<double>& zs, std::size_t B,
                                  std::uint64_t seed, const TestOptions& opts = {}) {
  if (thetas.size() != zs.size()) throw DomainError("baseline_rank_u: length mismatch");
  const std::size_t n = zs.size();
  if (n < 2) throw DomainError("baseline_rank_u: need n >= 2");
  if (B < 1) throw DomainError("baseline_rank_u: B must be >= 1");
  const bool theta_const =
      std::all_of(thetas.begin(), thetas.end(), [&](double t) { return t == thetas[0]; });
  const bool z_const = std::all_of(zs.begin(), zs.end(), [&](double z) { return z == zs[0]; });
  if (theta_const || z_const)
    throw DegenerateData("baseline_rank_u: constant input");

  const auto theta_ranks = detail::average_ranks(thetas);
  const auto z_ranks = detail::average_ranks(zs);
  std::vector<double> cosb(n), sinb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double beta = 2.0 * std::numbers::pi * theta_ranks[i] / static_cast<double>(n);
    cosb[i] = std::cos(beta);
    sinb[i] = std::sin(beta);
  }
  auto u_of = [&](const std::vector<double>& r) {
    double tc = 0.0, ts = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tc += r[i] * cosb[i];
      ts += r[i] * sinb[i];
    }
    return tc * tc + ts * ts;
  };
  const double observed = u_of(z_ranks);

  auto stat = [&](const std::vector<std::size_t>& sigma) {
    std::vector<double> rp(n);
    for (std::size_t i = 0; i < n; ++i) rp[i] = z_ranks[sigma[i]];
    return u_of(rp);
  };
  return detail::permute_upper_tail(observed, n, B, seed, opts, stat,
                                    TestMethod::baseline_u);
}

}  // namespace dirlin
