#pragma once
// Two-parameter bandwidth search: a log-spaced grid sweep followed by a
// Nelder-Mead polish in (log h, log g). Non-finite objective values mark a
// cell as unusable rather than aborting the search; the whole grid failing is
// an error. A winner on the grid edge triggers a bounded widening of that
// edge so the reported optimum is interior whenever one exists nearby.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dirlin/errors.hpp"

namespace dirlin {

struct GridSpec {
  double h_lo = 0.0;
  double h_hi = 0.0;
  double g_lo = 0.0;
  double g_hi = 0.0;
  int n_h = 20;
  int n_g = 20;
};

struct OptimResult {
  double h = 0.0;
  double g = 0.0;
  double value = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double la = std::log(lo);
  const double lb = std::log(hi);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

// Nelder-Mead maximization in the plane; non-finite evaluations count as
// -infinity so the simplex retreats from them.
template <typename F>
void nelder_mead_2d(F&& fn, double& x0, double& x1, double step0, double step1,
                    double& best_value, int max_iter) {
  struct Vertex {
    double p[2];
    double v;
  };
  auto eval = [&](const double p[2]) {
    const double v = fn(p[0], p[1]);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };
  Vertex s[3];
  s[0] = {{x0, x1}, 0.0};
  s[1] = {{x0 + step0, x1}, 0.0};
  s[2] = {{x0, x1 + step1}, 0.0};
  for (auto& vert : s) vert.v = eval(vert.p);

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  for (int it = 0; it < max_iter; ++it) {
    std::sort(std::begin(s), std::end(s),
              [](const Vertex& a, const Vertex& b) { return a.v > b.v; });
    if (s[0].v - s[2].v < 1e-12 * (1.0 + std::abs(s[0].v))) break;

    const double c0 = 0.5 * (s[0].p[0] + s[1].p[0]);
    const double c1 = 0.5 * (s[0].p[1] + s[1].p[1]);
    double refl[2] = {c0 + alpha * (c0 - s[2].p[0]), c1 + alpha * (c1 - s[2].p[1])};
    const double vr = eval(refl);

    if (vr > s[0].v) {
      double expd[2] = {c0 + gamma * (refl[0] - c0), c1 + gamma * (refl[1] - c1)};
      const double ve = eval(expd);
      if (ve > vr) {
        s[2] = {{expd[0], expd[1]}, ve};
      } else {
        s[2] = {{refl[0], refl[1]}, vr};
      }
    } else if (vr > s[1].v) {
      s[2] = {{refl[0], refl[1]}, vr};
    } else {
      const bool outside = vr > s[2].v;
      const double bx = outside ? refl[0] : s[2].p[0];
      const double by = outside ? refl[1] : s[2].p[1];
      double contr[2] = {c0 + rho * (bx - c0), c1 + rho * (by - c1)};
      const double vc = eval(contr);
      if (vc > (outside ? vr : s[2].v)) {
        s[2] = {{contr[0], contr[1]}, vc};
      } else {
        for (int k = 1; k < 3; ++k) {
          s[k].p[0] = s[0].p[0] + sigma * (s[k].p[0] - s[0].p[0]);
          s[k].p[1] = s[0].p[1] + sigma * (s[k].p[1] - s[0].p[1]);
          s[k].v = eval(s[k].p);
        }
      }
    }
  }
  std::sort(std::begin(s), std::end(s),
            [](const Vertex& a, const Vertex& b) { return a.v > b.v; });
  if (s[0].v > best_value) {
    best_value = s[0].v;
    x0 = s[0].p[0];
    x1 = s[0].p[1];
  }
}

}  // namespace detail

// Maximize objective(h, g) over a log-spaced grid, then polish with
// Nelder-Mead in log coordinates. Ties on the grid resolve to the smallest
// h, then the smallest g. Throws NonFiniteObjective if no grid cell
// evaluates to a finite value.
template <typename F>
OptimResult grid_maximize(F&& objective, GridSpec grid, bool refine = true) {
  if (!(grid.h_lo > 0 && grid.h_hi > grid.h_lo && grid.g_lo > 0 && grid.g_hi > grid.g_lo))
    throw DomainError("grid_maximize: bounds must satisfy 0 < lo < hi");
  if (grid.n_h < 2 || grid.n_g < 2)
    throw DomainError("grid_maximize: need at least a 2x2 grid");

  OptimResult result;
  int widen_h_lo = 0, widen_h_hi = 0, widen_g_lo = 0, widen_g_hi = 0;

  int best_ih = -1, best_ig = -1;
  double best_h = 0.0, best_g = 0.0;
  double best_v = -std::numeric_limits<double>::infinity();

  while (true) {
    const auto hs = detail::log_space(grid.h_lo, grid.h_hi, grid.n_h);
    const auto gs = detail::log_space(grid.g_lo, grid.g_hi, grid.n_g);
    best_ih = best_ig = -1;
    best_v = -std::numeric_limits<double>::infinity();
    for (int ih = 0; ih < grid.n_h; ++ih) {
      for (int ig = 0; ig < grid.n_g; ++ig) {
        const double v = objective(hs[static_cast<std::size_t>(ih)],
                                   gs[static_cast<std::size_t>(ig)]);
        if (!std::isfinite(v)) continue;
        if (v > best_v) {
          best_v = v;
          best_ih = ih;
          best_ig = ig;
        }
      }
    }
    if (best_ih < 0)
      throw NonFiniteObjective("grid_maximize: objective non-finite on the whole grid");
    best_h = hs[static_cast<std::size_t>(best_ih)];
    best_g = gs[static_cast<std::size_t>(best_ig)];

    bool widened = false;
    auto widen = [&](double& bound, bool lower, int& count, const char* which) {
      if (count >= 2) {
        result.warnings.push_back(std::string("optimum stayed at the ") + which +
                                  " grid edge after widening");
        return;
      }
      bound = lower ? bound / 4.0 : bound * 4.0;
      ++count;
      widened = true;
      result.warnings.push_back(std::string("grid widened at the ") + which + " edge");
    };
    if (best_ih == 0) widen(grid.h_lo, true, widen_h_lo, "h lower");
    if (best_ih == grid.n_h - 1) widen(grid.h_hi, false, widen_h_hi, "h upper");
    if (best_ig == 0) widen(grid.g_lo, true, widen_g_lo, "g lower");
    if (best_ig == grid.n_g - 1) widen(grid.g_hi, false, widen_g_hi, "g upper");
    if (!widened) break;
  }

  double lx = std::log(best_h);
  double ly = std::log(best_g);
  if (refine) {
    const double step_h =
        (std::log(grid.h_hi) - std::log(grid.h_lo)) / static_cast<double>(grid.n_h - 1);
    const double step_g =
        (std::log(grid.g_hi) - std::log(grid.g_lo)) / static_cast<double>(grid.n_g - 1);
    detail::nelder_mead_2d([&](double a, double b) { return objective(std::exp(a), std::exp(b)); },
                           lx, ly, step_h, step_g, best_v, 200);
  }
  result.h = std::exp(lx);
  result.g = std::exp(ly);
  result.value = best_v;
  return result;
}

}  // namespace dirlin
