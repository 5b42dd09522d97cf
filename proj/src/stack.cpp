#include "lrising/stack.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lrising/rg.hpp"

namespace lrising {

namespace {

// Offset separating a layer's training stream from its generation stream.
constexpr std::uint64_t kHiddenStreamSalt = 0x9e3779b97f4a7c15ull;

std::vector<NodeState> flatten(const SampleSet& samples) {
    std::vector<NodeState> data;
    data.reserve(samples.grids.size());
    for (const auto& grid : samples.grids) {
        data.emplace_back(grid.values().begin(), grid.values().end());
    }
    return data;
}

}  // namespace

void StackSpec::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("stack needs at least two layer sizes");
    if (layer_configs.size() != layer_sizes.size() - 1) {
        throw std::invalid_argument("stack needs one train config per layer");
    }
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        if (layer_sizes[l] != 4 * layer_sizes[l + 1]) {
            throw std::invalid_argument("layer " + std::to_string(l + 1) +
                                        " must shrink the node count by exactly x1/4");
        }
    }
}

std::vector<NodeState> propagate_hidden(const std::vector<NodeState>& data, const RbmParams& p,
                                        Rng& rng) {
    std::vector<NodeState> hidden;
    hidden.reserve(data.size());
    for (const auto& v : data) hidden.push_back(hidden_given_visible(v, p, rng).state);
    return hidden;
}

std::vector<RbmParams> train_stack(const SampleSet& samples, const StackSpec& spec) {
    spec.validate();
    if (samples.grids.empty()) throw std::invalid_argument("no training configurations");
    if (samples.geometry.site_count() != spec.layer_sizes.front()) {
        throw std::invalid_argument("sample grids do not match the first layer size");
    }

    std::vector<RbmParams> stack;
    stack.reserve(spec.layer_configs.size());
    std::vector<NodeState> data = flatten(samples);
    for (std::size_t l = 0; l < spec.layer_configs.size(); ++l) {
        const TrainConfig& cfg = spec.layer_configs[l];
        stack.push_back(train_rbm(data, spec.layer_sizes[l + 1], cfg).params);
        if (l + 1 < spec.layer_configs.size()) {
            Rng gen(cfg.seed + kHiddenStreamSalt);
            data = propagate_hidden(data, stack.back(), gen);
        }
    }
    return stack;
}

std::vector<double> vh_matrix_rbm(const SampleSet& samples, const std::vector<RbmParams>& stack,
                                  int layer, Rng& rng) {
    if (layer < 1 || layer > static_cast<int>(stack.size())) {
        throw std::out_of_range("layer index out of range");
    }
    if (samples.grids.empty()) throw std::invalid_argument("empty sample set");
    const int n_visible = samples.geometry.site_count();
    if (stack.front().n_visible != n_visible) {
        throw std::invalid_argument("samples do not match the stack's first layer");
    }
    const int n_coarse = stack[static_cast<std::size_t>(layer - 1)].n_hidden;

    std::vector<double> acc(static_cast<std::size_t>(n_visible) * n_coarse, 0.0);
    NodeState state;
    for (const auto& grid : samples.grids) {
        state.assign(grid.values().begin(), grid.values().end());
        for (int l = 0; l < layer; ++l) {
            state = hidden_given_visible(state, stack[static_cast<std::size_t>(l)], rng).state;
        }
        for (int i = 0; i < n_visible; ++i) {
            const double vi = grid.spin(i);
            double* row = acc.data() + static_cast<std::size_t>(i) * n_coarse;
            for (int a = 0; a < n_coarse; ++a) row[a] += vi * state[static_cast<std::size_t>(a)];
        }
    }
    for (auto& x : acc) x /= static_cast<double>(samples.grids.size());
    return acc;
}

std::vector<double> vh_matrix_rg(const SampleSet& samples, int steps, Rng& rng) {
    if (steps < 1) throw std::out_of_range("steps must be >= 1");
    if (samples.grids.empty()) throw std::invalid_argument("empty sample set");
    const int n_visible = samples.geometry.site_count();
    const int coarse_side = samples.geometry.side() >> steps;
    if (coarse_side < 1 || (coarse_side << steps) != samples.geometry.side()) {
        throw std::invalid_argument("lattice side is not divisible by 2^steps");
    }
    const int n_coarse = coarse_side * coarse_side;

    std::vector<double> acc(static_cast<std::size_t>(n_visible) * n_coarse, 0.0);
    for (const auto& grid : samples.grids) {
        SpinGrid coarse = grid;
        for (int s = 0; s < steps; ++s) coarse = block_spin(coarse, rng);
        for (int i = 0; i < n_visible; ++i) {
            const double vi = grid.spin(i);
            double* row = acc.data() + static_cast<std::size_t>(i) * n_coarse;
            for (int a = 0; a < n_coarse; ++a) row[a] += vi * coarse.spin(a);
        }
    }
    for (auto& x : acc) x /= static_cast<double>(samples.grids.size());
    return acc;
}

VhCorrelationMap vh_map_from_matrix(const std::vector<double>& matrix, int n_visible,
                                    int n_coarse, int layer, int index) {
    if (index < 0 || index >= n_coarse) throw std::out_of_range("coarse index out of range");
    VhCorrelationMap map;
    map.layer = layer;
    map.hidden_index = index;
    map.input_side = static_cast<int>(std::sqrt(static_cast<double>(n_visible)));
    map.values.resize(static_cast<std::size_t>(n_visible));
    for (int i = 0; i < n_visible; ++i) {
        map.values[static_cast<std::size_t>(i)] = matrix[static_cast<std::size_t>(i) * n_coarse + index];
    }
    return map;
}

VhCorrelationMap vh_map_rbm(const SampleSet& samples, const std::vector<RbmParams>& stack,
                            int layer, int hidden_index, Rng& rng) {
    if (layer < 1 || layer > static_cast<int>(stack.size())) {
        throw std::out_of_range("layer index out of range");
    }
    const int n_coarse = stack[static_cast<std::size_t>(layer - 1)].n_hidden;
    if (hidden_index < 0 || hidden_index >= n_coarse) {
        throw std::out_of_range("hidden index out of range");
    }
    const std::vector<double> matrix = vh_matrix_rbm(samples, stack, layer, rng);
    return vh_map_from_matrix(matrix, samples.geometry.site_count(), n_coarse, layer, hidden_index);
}

VhCorrelationMap vh_map_rg(const SampleSet& samples, int steps, int block_index, Rng& rng) {
    const int coarse_side = samples.geometry.side() >> steps;
    const int n_coarse = coarse_side * coarse_side;
    if (block_index < 0 || block_index >= n_coarse) {
        throw std::out_of_range("block index out of range");
    }
    const std::vector<double> matrix = vh_matrix_rg(samples, steps, rng);
    return vh_map_from_matrix(matrix, samples.geometry.site_count(), n_coarse, steps, block_index);
}

}  // namespace lrising
