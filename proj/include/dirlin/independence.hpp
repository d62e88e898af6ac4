#pragma once
// The independence statistic and its calibrations.
//
// T_n is the squared L2 distance between the joint kernel density estimate
// and the product of the marginal estimates. It collapses to three sums over
// the pairwise Gram matrices Psi(h) and Omega(g):
//
//   T_n = S1/n^2 - 2 S2/n^3 + S_psi S_omega/n^4
//
// with S1 the entrywise (Hadamard) sum, S2 the row-sum inner product, and
// S_psi, S_omega the grand totals. Permuting the linear responses only
// permutes Omega's index set, so each permuted statistic is an O(n^2)
// gather over the matrices built once from the original sample; the grand
// totals do not move at all.
//
// Calibration is by random permutations (exchangeability under the null) or
// by the smoothed bootstrap: resample X* and Z* independently from the
// kernel-smoothed marginals at pilot bandwidths, which imposes independence
// by construction, and recompute T_n at fixed test bandwidths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dirlin/bootstrap_bandwidths.hpp"
#include "dirlin/errors.hpp"
#include "dirlin/kde.hpp"
#include "dirlin/matrix.hpp"
#include "dirlin/parallel.hpp"
#include "dirlin/rng.hpp"
#include "dirlin/sample.hpp"
#include "dirlin/vmf.hpp"

namespace dirlin {

struct GramMatrices {
  Matrix psi;
  Matrix omega;
  double h = 0.0;
  double g = 0.0;
};

inline GramMatrices gram_matrices(const DirLinSample& s, const BandwidthPair& bw) {
  if (s.size() == 0) throw DomainError("gram_matrices: empty sample");
  if (!(bw.h > 0 && bw.g > 0)) throw DomainError("gram_matrices: bandwidths must be positive");
  const auto t = make_pair_tables(s);
  GramMatrices gm;
  gm.psi = detail::psi_gram(t.dots, t.q, bw.h);
  gm.omega = detail::omega_gram(t.zdiff, bw.g);
  gm.h = bw.h;
  gm.g = bw.g;
  return gm;
}

enum class TestMethod { permutation, bootstrap, baseline_r2, baseline_u };

inline const char* method_name(TestMethod m) {
  switch (m) {
    case TestMethod::permutation: return "permutation";
    case TestMethod::bootstrap: return "bootstrap";
    case TestMethod::baseline_r2: return "baseline-R2";
    case TestMethod::baseline_u: return "baseline-U";
  }
  return "unknown";
}

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::permutation;
  std::size_t B = 0;
  std::optional<BandwidthPair> bandwidths;
  Selector selector = Selector::fixed;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  int q = 0;
  std::vector<std::string> warnings;
};

struct TestOptions {
  bool add_one = false;   // report (count+1)/(B+1) instead of count/B
  unsigned workers = 1;   // calibration parallelism; result is identical for any value
};

namespace detail {

struct TnParts {
  std::vector<double> row_psi;
  std::vector<double> row_omega;
  double hadamard = 0.0;   // sum_ij psi_ij omega_ij
  double sum_psi = 0.0;
  double sum_omega = 0.0;
};

inline TnParts tn_parts(const GramMatrices& gm) {
  const std::size_t n = gm.psi.rows();
  TnParts p;
  p.row_psi.assign(n, 0.0);
  p.row_omega.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* pr = gm.psi.row(i);
    const double* orow = gm.omega.row(i);
    double rp = 0.0, ro = 0.0, had = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      rp += pr[j];
      ro += orow[j];
      had += pr[j] * orow[j];
    }
    p.row_psi[i] = rp;
    p.row_omega[i] = ro;
    p.hadamard += had;
    p.sum_psi += rp;
    p.sum_omega += ro;
  }
  return p;
}

inline double tn_from_sums(double s1, double s2, double sum_psi, double sum_omega,
                           std::size_t n) {
  const double nd = static_cast<double>(n);
  return s1 / (nd * nd) - 2.0 * s2 / (nd * nd * nd) +
         sum_psi * sum_omega / (nd * nd * nd * nd);
}

// Statistic for the sample with z permuted by sigma: Omega entries are
// gathered at (sigma(i), sigma(j)) and the row sums at sigma(i); the
// grand-total addend is unchanged.
inline double tn_permuted(const GramMatrices& gm, const TnParts& parts,
                          const std::vector<std::size_t>& sigma) {
  const std::size_t n = gm.psi.rows();
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* pr = gm.psi.row(i);
    const double* osrow = gm.omega.row(sigma[i]);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += pr[j] * osrow[sigma[j]];
    s1 += acc;
    s2 += parts.row_psi[i] * parts.row_omega[sigma[i]];
  }
  return tn_from_sums(s1, s2, parts.sum_psi, parts.sum_omega, n);
}

inline double p_from_count(std::size_t count, std::size_t B, bool add_one) {
  if (add_one)
    return static_cast<double>(count + 1) / static_cast<double>(B + 1);
  return static_cast<double>(count) / static_cast<double>(B);
}

// Stream tags separating the independent RNG substreams of one seed.
constexpr std::uint64_t stream_permutation = 0x7065726d'75746174ULL;
constexpr std::uint64_t stream_bootstrap = 0x626f6f74'73747261ULL;

}  // namespace detail

inline double t_statistic(const GramMatrices& gm) {
  const auto parts = detail::tn_parts(gm);
  double s2 = 0.0;
  for (std::size_t i = 0; i < gm.psi.rows(); ++i)
    s2 += parts.row_psi[i] * parts.row_omega[i];
  return detail::tn_from_sums(parts.hadamard, s2, parts.sum_psi, parts.sum_omega,
                              gm.psi.rows());
}

// Permutation calibration at fixed bandwidths. Large T_n is evidence
// against independence, so the p-value is the fraction of permuted
// statistics at or above the observed one. Each permutation owns the RNG
// substream (seed, b), making the result identical for any worker count.
inline TestReport permutation_test(const DirLinSample& s, const BandwidthPair& bw,
                                   std::size_t B, std::uint64_t seed,
                                   const TestOptions& opts = {}) {
  if (B < 1) throw DomainError("permutation_test: B must be >= 1");
  if (s.size() < 2) throw DomainError("permutation_test: need n >= 2");
  const GramMatrices gm = gram_matrices(s, bw);
  const auto parts = detail::tn_parts(gm);
  double s2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) s2 += parts.row_psi[i] * parts.row_omega[i];
  const double tn =
      detail::tn_from_sums(parts.hadamard, s2, parts.sum_psi, parts.sum_omega, s.size());

  std::vector<double> permuted(B);
  parallel_for(B, opts.workers, [&](std::size_t b) {
    Rng rng(seed, {detail::stream_permutation, b});
    const auto sigma = rng.permutation(s.size());
    permuted[b] = detail::tn_permuted(gm, parts, sigma);
  });
  std::size_t count = 0;
  for (double t : permuted)
    if (tn <= t) ++count;

  TestReport report;
  report.statistic = tn;
  report.p_value = detail::p_from_count(count, B, opts.add_one);
  report.method = TestMethod::permutation;
  report.B = B;
  report.bandwidths = bw;
  report.selector = Selector::fixed;
  report.seed = seed;
  report.n = s.size();
  report.q = s.q();
  return report;
}

// Select bandwidths with the given selector, then calibrate by permutation.
inline TestReport selected_permutation_test(const DirLinSample& s, Selector sel,
                                            std::size_t B, std::uint64_t seed,
                                            const TestOptions& opts = {}) {
  std::vector<std::string> warnings;
  const BandwidthPair bw = select_bandwidths(s, sel, &warnings);
  TestReport report = permutation_test(s, bw, B, seed, opts);
  report.selector = sel;
  report.warnings = std::move(warnings);
  return report;
}

// One draw of n pairs from the product of the kernel-smoothed marginals:
// X* from the directional KDE at h_p, Z* from the linear KDE at g_p, with
// the two mixture indices drawn independently. This is the null resample.
inline DirLinSample smooth_bootstrap_sample(const DirLinSample& s,
                                            const PilotBandwidths& pilots, Rng& rng) {
  detail::require_pilots(pilots);
  const std::size_t n = s.size();
  const double kappa = 1.0 / (pilots.h_p * pilots.h_p);
  DirLinSample out;
  out.x.reserve(n);
  out.z.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = rng.integer(n);
    out.x.push_back(vmf_sample_one(VonMisesFisher{s.x[i], kappa}, rng));
    const std::size_t j = rng.integer(n);
    out.z.push_back(s.z[j] + pilots.g_p * rng.normal());
  }
  return out;
}

// Smoothed-bootstrap calibration: pilot bandwidths, bootstrap-optimal test
// bandwidths, then B null resamples scored at those fixed bandwidths.
inline TestReport bootstrap_test(const DirLinSample& s, std::size_t B, std::uint64_t seed,
                                 const TestOptions& opts = {}) {
  if (B < 1) throw DomainError("bootstrap_test: B must be >= 1");
  if (s.size() < 2) throw DomainError("bootstrap_test: need n >= 2");
  std::vector<std::string> warnings;
  PilotBandwidths pilots = pilot_bandwidths(s);
  warnings.insert(warnings.end(), pilots.warnings.begin(), pilots.warnings.end());
  const BandwidthPair bw = select_bo(s, pilots, &warnings);
  const double tn = t_statistic(gram_matrices(s, bw));

  std::vector<double> resampled(B);
  parallel_for(B, opts.workers, [&](std::size_t b) {
    Rng rng(seed, {detail::stream_bootstrap, b});
    const DirLinSample star = smooth_bootstrap_sample(s, pilots, rng);
    resampled[b] = t_statistic(gram_matrices(star, bw));
  });
  std::size_t count = 0;
  for (double t : resampled)
    if (tn <= t) ++count;

  TestReport report;
  report.statistic = tn;
  report.p_value = detail::p_from_count(count, B, opts.add_one);
  report.method = TestMethod::bootstrap;
  report.B = B;
  report.bandwidths = bw;
  report.selector = Selector::bo;
  report.seed = seed;
  report.n = s.size();
  report.q = s.q();
  report.warnings = std::move(warnings);
  return report;
}

}  // namespace dirlin
