#include "lrising/mcmc.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrising {

namespace {

// Spreads the flipped spin's change into every cached field; O(N).
void apply_flip(SpinGrid& grid, std::vector<double>& fields, const CouplingKernel& kernel,
                int site) {
    grid.flip(site);
    const int side = grid.side();
    const int x = site % side, y = site / side;
    const double delta = 2.0 * grid.spin(site);  // s_new - s_old
    for (int dy = 0; dy < side; ++dy) {
        const int yj = y + dy < side ? y + dy : y + dy - side;
        const double* jrow = kernel.table().data() + static_cast<std::size_t>(dy) * side;
        double* frow = fields.data() + static_cast<std::size_t>(yj) * side;
        for (int dx = 0; dx < side; ++dx) {
            const int xj = x + dx < side ? x + dx : x + dx - side;
            frow[xj] += delta * jrow[dx];
        }
    }
}

}  // namespace

bool mcmc_step(SpinGrid& grid, std::vector<double>& fields, const CouplingKernel& kernel,
               const LatticeGeometry& geom, const McmcConfig& cfg, Rng& rng) {
    const int site = static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.site_count())));
    const double delta_e = flip_delta(grid, site, fields[static_cast<std::size_t>(site)], geom.mu());
    bool accept;
    if (delta_e <= 0.0) {
        accept = true;
    } else if (cfg.temperature > 0.0) {
        accept = rng.uniform() < std::exp(-delta_e / cfg.temperature);
    } else {
        accept = false;
    }
    if (accept) apply_flip(grid, fields, kernel, site);
    return accept;
}

SampleSet run_chain(const LatticeGeometry& geom, const CouplingKernel& kernel,
                    const McmcConfig& cfg, std::size_t n_samples) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (cfg.stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (cfg.temperature < 0.0 || !std::isfinite(cfg.temperature)) {
        throw std::invalid_argument("temperature must be finite and >= 0");
    }

    // Full field recompute every this many accepted flips bounds float drift.
    constexpr std::uint64_t kRefreshInterval = 1'000'000;

    Rng rng(cfg.seed);
    SpinGrid grid = SpinGrid::random(geom.side(), rng);
    std::vector<double> fields = all_local_fields(grid, kernel);

    std::uint64_t accepted_since_refresh = 0;
    auto step = [&] {
        if (mcmc_step(grid, fields, kernel, geom, cfg, rng)) {
            if (++accepted_since_refresh >= kRefreshInterval) {
                fields = all_local_fields(grid, kernel);
                accepted_since_refresh = 0;
            }
        }
    };

    for (std::uint64_t k = 0; k < cfg.burn_in_steps; ++k) step();

    SampleSet samples{geom, cfg.temperature, {}};
    samples.grids.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::uint64_t k = 0; k < cfg.stride; ++k) step();
        samples.grids.push_back(grid);
    }
    return samples;
}

ExactObservables exact_enumeration(const LatticeGeometry& geom, const CouplingKernel& kernel,
                                   double temperature) {
    const int n = geom.site_count();
    if (n > 16) throw std::invalid_argument("exact enumeration limited to 16 sites");
    if (!(temperature > 0.0)) throw std::invalid_argument("exact enumeration requires T > 0");

    // Pairwise couplings, i < j.
    std::vector<double> pair_j(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            pair_j[static_cast<std::size_t>(i) * n + j] = kernel.between(i, j);
        }
    }

    const std::uint32_t n_states = 1u << n;
    std::vector<double> energies(n_states);
    double e_min = std::numeric_limits<double>::infinity();
    for (std::uint32_t state = 0; state < n_states; ++state) {
        double pair_sum = 0.0;
        int spin_sum = 0;
        for (int i = 0; i < n; ++i) {
            const int si = (state >> i) & 1 ? +1 : -1;
            spin_sum += si;
            for (int j = i + 1; j < n; ++j) {
                const int sj = (state >> j) & 1 ? +1 : -1;
                pair_sum += pair_j[static_cast<std::size_t>(i) * n + j] * si * sj;
            }
        }
        const double energy = -pair_sum - geom.mu() * spin_sum;
        energies[state] = energy;
        e_min = std::min(e_min, energy);
    }

    ExactObservables out;
    out.pair_correlation.assign(static_cast<std::size_t>(n) * n, 0.0);
    double z = 0.0, sum_m = 0.0, sum_abs_m = 0.0, sum_e = 0.0;
    for (std::uint32_t state = 0; state < n_states; ++state) {
        const double weight = std::exp(-(energies[state] - e_min) / temperature);
        z += weight;
        const int ones = std::popcount(state);
        const double m = static_cast<double>(2 * ones - n) / n;
        sum_m += weight * m;
        sum_abs_m += weight * std::abs(m);
        sum_e += weight * energies[state];
        for (int i = 0; i < n; ++i) {
            const int si = (state >> i) & 1 ? +1 : -1;
            for (int j = i + 1; j < n; ++j) {
                const int sj = (state >> j) & 1 ? +1 : -1;
                out.pair_correlation[static_cast<std::size_t>(i) * n + j] += weight * si * sj;
            }
        }
    }

    out.mean_magnetization = sum_m / z;
    out.mean_abs_magnetization = sum_abs_m / z;
    out.mean_energy = sum_e / z;
    for (int i = 0; i < n; ++i) {
        out.pair_correlation[static_cast<std::size_t>(i) * n + i] = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double c = out.pair_correlation[static_cast<std::size_t>(i) * n + j] / z;
            out.pair_correlation[static_cast<std::size_t>(i) * n + j] = c;
            out.pair_correlation[static_cast<std::size_t>(j) * n + i] = c;
        }
    }
    return out;
}

}  // namespace lrising
