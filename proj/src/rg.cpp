#include "lrising/rg.hpp"

#include <stdexcept>

namespace lrising {

SpinGrid block_spin(const SpinGrid& grid, Rng& rng) {
    const int side = grid.side();
    if (side % 2 != 0) throw std::invalid_argument("block_spin needs an even side");
    const int out_side = side / 2;
    SpinGrid out(out_side);
    for (int by = 0; by < out_side; ++by) {
        for (int bx = 0; bx < out_side; ++bx) {
            const int sum = grid.spin(2 * bx, 2 * by) + grid.spin(2 * bx + 1, 2 * by) +
                            grid.spin(2 * bx, 2 * by + 1) + grid.spin(2 * bx + 1, 2 * by + 1);
            std::int8_t value;
            if (sum > 0) {
                value = +1;
            } else if (sum < 0) {
                value = -1;
            } else {
                value = static_cast<std::int8_t>(rng.coin());
            }
            out.set_spin(by * out_side + bx, value);
        }
    }
    return out;
}

std::vector<SampleSet> rg_flow(const SampleSet& samples, int steps, Rng& rng) {
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    int side = samples.geometry.side();
    for (int s = 0; s < steps; ++s) {
        if (side % 2 != 0) {
            throw std::invalid_argument("lattice side is not divisible by 2^steps");
        }
        side /= 2;
    }
    if (side < 2) throw std::invalid_argument("coarse-grained side would drop below 2");

    std::vector<SampleSet> flow;
    flow.reserve(static_cast<std::size_t>(steps));
    const SampleSet* current = &samples;
    for (int s = 0; s < steps; ++s) {
        const int out_side = current->geometry.side() / 2;
        SampleSet next{LatticeGeometry(out_side, samples.geometry.alpha(), samples.geometry.mu()),
                       current->temperature,
                       {}};
        next.grids.reserve(current->grids.size());
        for (const auto& grid : current->grids) next.grids.push_back(block_spin(grid, rng));
        flow.push_back(std::move(next));
        current = &flow.back();
    }
    return flow;
}

}  // namespace lrising
