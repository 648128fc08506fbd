#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hte/evolve.hpp"
#include "hte/gp.hpp"
#include "hte/hierarchy.hpp"
#include "hte/rng.hpp"

namespace hte::testing {

// 64 arms, one per contact pattern. The planted arm pays 0.9, the rest
// 0.6 minus 0.05 per bit away from it, plus Gaussian-ish noise (sd 0.05).
// Returns how many of the final 50 of 200 pulls chose the planted arm.
inline int bandit_hits(std::uint64_t seed, double beta = 2.0) {
  Rng rng(seed);
  const auto best = static_cast<std::uint8_t>(rng.index(64));
  GPModel gp(6, {1.0, 0.05, 1e-3}, [](std::span<const double>) { return 0.5; });
  std::vector<std::vector<double>> arms;
  for (Pattern p : Pattern::all()) {
    const auto b = p.bits();
    arms.emplace_back(b.begin(), b.end());
  }
  int hits = 0;
  for (int pull = 0; pull < 200; ++pull) {
    const std::size_t a = ucb_select(gp, arms, beta, rng);
    const int away = std::popcount(static_cast<unsigned>(a ^ best));
    // Sum of three uniforms: bell-shaped, sd 0.05.
    const double noise = (rng.uniform() + rng.uniform() + rng.uniform() - 1.5) * 0.1;
    const double reward = (away == 0 ? 0.9 : 0.6 - 0.05 * away) + noise;
    gp.update(arms[a], reward);
    if (pull >= 150 && a == best) ++hits;
  }
  return hits;
}

// Bin of v among n equal cells over [lo, hi] by counting the edges at or below
// it; values outside fall into the first or last cell.
inline int oracle_bin(double v, double lo, double hi, int n) {
  int k = 0;
  for (int i = 1; i < n; ++i)
    if (v >= lo + (hi - lo) * i / n) k = i;
  return k;
}

// A hierarchy trained at a few thousand evaluations per layer, enough for
// pattern lookups, modulation and short episodes.
inline TrainParams small_train_params(std::uint64_t seed = 1) {
  TrainParams p;
  p.seed = seed;
  p.bottom = {3000, 0.17};
  p.middle = {20000, 0.11};
  p.top = {6000, 0.14};
  p.flat = {6000, 0.14};
  return p;
}

inline const HBRStack& small_stack() {
  static const HBRStack stack = train_hierarchy(small_train_params());
  return stack;
}

}  // namespace hte::testing
