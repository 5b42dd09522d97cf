#pragma once

#include <cstdint>
#include <vector>

#include "lrising/geometry.hpp"
#include "lrising/rng.hpp"

namespace lrising {

/// Metropolis chain parameters. Step counts are single-site proposals, not
/// sweeps. T = 0 degenerates to the greedy rule (accept only dE <= 0).
struct McmcConfig {
    double temperature = 1.0;
    std::uint64_t burn_in_steps = 0;
    std::uint64_t stride = 1;
    std::uint64_t seed = 0;
};

/// Batch of grids tagged with the temperature they were generated at.
struct SampleSet {
    LatticeGeometry geometry;
    double temperature = 0.0;
    std::vector<SpinGrid> grids;
};

/// One Metropolis proposal on `grid`. `fields` is the cached local-field
/// array (fields[i] = local_field(grid, i)); it is updated incrementally
/// (O(N)) when the flip is accepted. Returns whether the flip was accepted.
bool mcmc_step(SpinGrid& grid, std::vector<double>& fields, const CouplingKernel& kernel,
               const LatticeGeometry& geom, const McmcConfig& cfg, Rng& rng);

/// Runs a full chain: random initial grid, `burn_in_steps` discarded
/// proposals, then one retained grid every `stride` proposals. Bit-identical
/// results for identical (seed, cfg, geom).
SampleSet run_chain(const LatticeGeometry& geom, const CouplingKernel& kernel,
                    const McmcConfig& cfg, std::size_t n_samples);

/// Exact Boltzmann averages on lattices with at most 16 sites.
struct ExactObservables {
    double mean_magnetization = 0.0;
    double mean_abs_magnetization = 0.0;
    double mean_energy = 0.0;
    /// N x N row-major; entry (i, j) is <s_i s_j>, diagonal exactly 1.
    std::vector<double> pair_correlation;
};

/// Full-state enumeration oracle. Requires L^2 <= 16 and T > 0.
ExactObservables exact_enumeration(const LatticeGeometry& geom, const CouplingKernel& kernel,
                                   double temperature);

}  // namespace lrising
