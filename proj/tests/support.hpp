#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "polgame/game.hpp"

namespace testsupport {

// Two players on [0, 1], caps (1, 2), cost rates (0.1, 0.2). Small enough
// to check every number by hand, rich enough to be asymmetric.
inline polgame::GameSpec g1() {
  return polgame::GameSpec::make(0.0, 1.0, 0.0, {{1.0, 0.1}, {2.0, 0.2}});
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Normalized error used throughout oracle comparisons: absolute near zero,
// relative for large magnitudes.
inline double rel_err(double got, double want) {
  return std::abs(got - want) / (1.0 + std::abs(want));
}

// Highest total block value over every partition of `mask`, by literal
// enumeration: pick the block containing the lowest member, recurse on the
// rest. Independent check for the superadditive cover.
inline double best_partition_value(const std::vector<double>& values, std::uint32_t mask) {
  if (mask == 0) return 0.0;
  const std::uint32_t anchor = mask & (0u - mask);
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t block = mask; block != 0; block = (block - 1) & mask) {
    if ((block & anchor) == 0) continue;
    const double rest = best_partition_value(values, mask ^ block);
    if (values[block] + rest > best) best = values[block] + rest;
  }
  return best;
}

// Random table values on a dyadic grid (multiples of 2^-20) so that sums of
// a few entries are exact doubles and order of addition cannot matter.
inline double dyadic_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() % (1u << 20)) / static_cast<double>(1u << 20);
}

}  // namespace testsupport
