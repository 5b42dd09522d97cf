#pragma once

#include <vector>

#include "lrising/mcmc.hpp"
#include "lrising/rng.hpp"

namespace lrising {

/// Kadanoff block-spin step: disjoint 2x2 blocks collapse to the sign of
/// their spin sum, halving the side. A zero sum is broken by a fair coin
/// so the global-flip symmetry survives in distribution. Blocks are visited
/// row-major; the coin stream is consumed only on ties.
SpinGrid block_spin(const SpinGrid& grid, Rng& rng);

/// Repeated block-spin coarse-graining; returns one SampleSet per step
/// (sides L/2, L/4, ...). Requires L divisible by 2^steps.
std::vector<SampleSet> rg_flow(const SampleSet& samples, int steps, Rng& rng);

}  // namespace lrising
