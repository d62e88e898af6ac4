#pragma once
// Monte Carlo size/power harness over the benchmark models.
//
// For a scenario (model, delta, n) each replicate draws one sample and runs
// every configured method on it, so methods are compared on identical data.
// The sample for replicate r comes from the RNG substream keyed by
// (seed, scenario, r) and each method's calibration gets its own derived
// seed, which makes the whole table a pure function of the config — byte
// for byte, whatever the worker count.
//
// A replicate that throws (a selector can fail on degenerate draws) is
// excluded from its cell and counted; the emitted M column is the number of
// replicates that actually contributed.

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dirlin/baselines.hpp"
#include "dirlin/bootstrap_bandwidths.hpp"
#include "dirlin/errors.hpp"
#include "dirlin/independence.hpp"
#include "dirlin/kde.hpp"
#include "dirlin/models.hpp"
#include "dirlin/parallel.hpp"
#include "dirlin/rng.hpp"
#include "dirlin/unit_vector.hpp"

namespace dirlin {

enum class Method { t_lcv, t_blcv, t_boot, r2, u };

inline const char* study_method_name(Method m) {
  switch (m) {
    case Method::t_lcv: return "T-LCV";
    case Method::t_blcv: return "T-BLCV";
    case Method::t_boot: return "T-boot";
    case Method::r2: return "R2";
    case Method::u: return "U";
  }
  return "unknown";
}

inline Method parse_method(const std::string& name) {
  if (name == "T-LCV") return Method::t_lcv;
  if (name == "T-BLCV") return Method::t_blcv;
  if (name == "T-boot") return Method::t_boot;
  if (name == "R2") return Method::r2;
  if (name == "U") return Method::u;
  throw DomainError("unknown method: " + name);
}

struct StudyConfig {
  std::vector<std::pair<int, double>> models;  // (id, delta)
  std::vector<std::size_t> ns;
  std::size_t M = 1000;
  std::size_t B = 1000;
  double alpha = 0.05;
  std::vector<Method> methods;
  int q = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool add_one = false;
  bool timings = false;  // when off, the seconds column is emitted as zero
};

struct StudyCell {
  int model = 0;
  double delta = 0.0;
  int q = 1;
  std::size_t n = 0;
  Method method = Method::t_lcv;
  std::size_t rejections = 0;
  std::size_t effective_m = 0;  // replicates that completed
  std::size_t failures = 0;
  double proportion = 0.0;
  double se = 0.0;
  double seconds = 0.0;
};

struct StudyResult {
  std::vector<StudyCell> cells;
  std::size_t total_failures = 0;
};

namespace detail {

constexpr std::uint64_t stream_study_sample = 0x73747564'79736d70ULL;
constexpr std::uint64_t stream_study_calib = 0x73747564'7963616cULL;

enum class ReplicateOutcome : unsigned char { accept = 0, reject = 1, failed = 2 };

inline void validate_study_config(const StudyConfig& c) {
  if (c.models.empty()) throw DomainError("study: no models configured");
  if (c.ns.empty()) throw DomainError("study: no sample sizes configured");
  if (c.methods.empty()) throw DomainError("study: no methods configured");
  if (c.M < 1) throw DomainError("study: M must be >= 1");
  if (c.B < 1) throw DomainError("study: B must be >= 1");
  if (!(c.alpha > 0 && c.alpha < 1)) throw DomainError("study: alpha must be in (0,1)");
  for (const auto& [id, delta] : c.models) make_model_spec(id, delta, c.q);
  for (std::size_t n : c.ns)
    if (n < 2) throw DomainError("study: sample sizes must be >= 2");
  if (c.q != 1)
    for (Method m : c.methods)
      if (m == Method::r2 || m == Method::u)
        throw DomainError("study: R2 and U are circular-only methods (q = 1)");
}

inline double replicate_p_value(Method method, const DirLinSample& sample, std::size_t B,
                                std::uint64_t cal_seed, bool add_one) {
  TestOptions opts;
  opts.add_one = add_one;
  opts.workers = 1;  // parallelism lives at the replicate level
  switch (method) {
    case Method::t_lcv: {
      const BandwidthPair bw = select_cv_bandwidths(sample, CvObjective::lcv);
      return permutation_test(sample, bw, B, cal_seed, opts).p_value;
    }
    case Method::t_blcv: {
      const BandwidthPair bw = select_blcv(sample);
      return permutation_test(sample, bw, B, cal_seed, opts).p_value;
    }
    case Method::t_boot:
      return bootstrap_test(sample, B, cal_seed, opts).p_value;
    case Method::r2:
    case Method::u: {
      std::vector<double> thetas(sample.size());
      for (std::size_t i = 0; i < sample.size(); ++i) thetas[i] = circle_angle(sample.x[i]);
      if (method == Method::r2)
        return baseline_r2(thetas, sample.z, B, cal_seed, opts).p_value;
      return baseline_rank_u(thetas, sample.z, B, cal_seed, opts).p_value;
    }
  }
  throw DomainError("study: unknown method");
}

}  // namespace detail

inline StudyResult run_study(const StudyConfig& config) {
  detail::validate_study_config(config);
  StudyResult result;

  for (const auto& [model_id, delta] : config.models) {
    const ModelSpec spec = make_model_spec(model_id, delta, config.q);
    const std::uint64_t delta_bits = std::bit_cast<std::uint64_t>(delta);
    for (std::size_t n : config.ns) {
      const std::size_t n_methods = config.methods.size();
      std::vector<detail::ReplicateOutcome> outcomes(config.M * n_methods);
      std::vector<std::atomic<long long>> nanos(n_methods);
      for (auto& a : nanos) a.store(0);

      parallel_for(config.M, config.workers, [&](std::size_t r) {
        Rng sample_rng(config.seed,
                       {detail::stream_study_sample, static_cast<std::uint64_t>(model_id),
                        delta_bits, static_cast<std::uint64_t>(config.q),
                        static_cast<std::uint64_t>(n), r});
        const DirLinSample sample = model_sample(spec, n, sample_rng);
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
          const std::uint64_t cal_seed = mix_keys(
              config.seed, {detail::stream_study_calib, static_cast<std::uint64_t>(model_id),
                            delta_bits, static_cast<std::uint64_t>(config.q),
                            static_cast<std::uint64_t>(n), r, mi});
          const auto start = std::chrono::steady_clock::now();
          detail::ReplicateOutcome outcome;
          try {
            const double p = detail::replicate_p_value(config.methods[mi], sample, config.B,
                                                       cal_seed, config.add_one);
            outcome = p <= config.alpha ? detail::ReplicateOutcome::reject
                                        : detail::ReplicateOutcome::accept;
          } catch (const Error&) {
            outcome = detail::ReplicateOutcome::failed;
          }
          if (config.timings) {
            const auto elapsed = std::chrono::steady_clock::now() - start;
            nanos[mi].fetch_add(
                std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());
          }
          outcomes[r * n_methods + mi] = outcome;
        }
      });

      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        StudyCell cell;
        cell.model = model_id;
        cell.delta = delta;
        cell.q = config.q;
        cell.n = n;
        cell.method = config.methods[mi];
        for (std::size_t r = 0; r < config.M; ++r) {
          switch (outcomes[r * n_methods + mi]) {
            case detail::ReplicateOutcome::reject:
              ++cell.rejections;
              ++cell.effective_m;
              break;
            case detail::ReplicateOutcome::accept:
              ++cell.effective_m;
              break;
            case detail::ReplicateOutcome::failed:
              ++cell.failures;
              break;
          }
        }
        if (cell.effective_m > 0) {
          cell.proportion =
              static_cast<double>(cell.rejections) / static_cast<double>(cell.effective_m);
          cell.se = std::sqrt(cell.proportion * (1.0 - cell.proportion) /
                              static_cast<double>(cell.effective_m));
        }
        cell.seconds = config.timings
                           ? static_cast<double>(nanos[mi].load()) * 1e-9
                           : 0.0;
        result.total_failures += cell.failures;
        result.cells.push_back(cell);
      }
    }
  }
  return result;
}

inline void write_study_csv(const StudyResult& result, std::ostream& out) {
  out << "model,delta,q,n,method,rejections,M,proportion,se,seconds\n";
  char line[256];
  for (const auto& c : result.cells) {
    std::snprintf(line, sizeof line, "%d,%.2f,%d,%zu,%s,%zu,%zu,%.6f,%.6f,%.6f\n", c.model,
                  c.delta, c.q, c.n, study_method_name(c.method), c.rejections, c.effective_m,
                  c.proportion, c.se, c.seconds);
    out << line;
  }
}

}  // namespace dirlin
