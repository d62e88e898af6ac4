#pragma once
// Benjamini-Yekutieli step-up adjustment. The harmonic factor c(m) makes
// the false-discovery-rate guarantee hold under arbitrary dependence among
// the tests, which is the right regime for spatially correlated units.
// Adjusted values are returned in the input order, clipped at 1, and are
// nondecreasing in the raw p-value.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "dirlin/errors.hpp"

namespace dirlin {

inline std::vector<double> by_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  if (m == 0) return {};
  for (double v : p)
    if (!(v >= 0 && v <= 1)) throw DomainError("by_adjust: p-values must lie in [0,1]");
  double c = 0.0;
  for (std::size_t i = 1; i <= m; ++i) c += 1.0 / static_cast<double>(i);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double value =
        static_cast<double>(m) * c * p[order[k]] / static_cast<double>(k + 1);
    running = std::min(running, value);
    adjusted[order[k]] = std::min(1.0, running);
  }
  return adjusted;
}

}  // namespace dirlin
