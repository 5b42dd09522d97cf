#pragma once

#include <vector>

#include "lrising/mcmc.hpp"
#include "lrising/rbm.hpp"
#include "lrising/rng.hpp"

namespace lrising {

/// Architecture of a greedily trained RBM stack. Each layer keeps exactly a
/// quarter of the nodes of the one below it, mirroring one block-spin step.
struct StackSpec {
    std::vector<int> layer_sizes;           // e.g. 4096, 1024, 256, 64
    std::vector<TrainConfig> layer_configs; // one per trained layer

    void validate() const;
    int n_layers() const { return static_cast<int>(layer_configs.size()); }
};

/// Greedy layer-wise training: layer 1 learns the raw configurations; each
/// subsequent layer learns the sampled hidden states of the previous one.
/// Hidden training data is generated with a per-layer generator seeded from
/// cfg.seed (offset by a fixed constant), so the whole stack is reproducible.
std::vector<RbmParams> train_stack(const SampleSet& samples, const StackSpec& spec);

/// Sampled hidden states of every vector in `data` under one layer.
std::vector<NodeState> propagate_hidden(const std::vector<NodeState>& data, const RbmParams& p,
                                        Rng& rng);

/// <v_i h_a> between original spins and one coarse variable, reshaped over
/// the input lattice.
struct VhCorrelationMap {
    int layer = 0;         // 1-based
    int hidden_index = 0;  // node / block index within that layer
    int input_side = 0;
    std::vector<double> values;  // input_side^2, row-major, entries in [-1, 1]
};

/// Full <v h> matrix (n_visible x n_coarse, row-major) against layer `layer`
/// of the stack; configurations propagate through sampled hidden states.
std::vector<double> vh_matrix_rbm(const SampleSet& samples, const std::vector<RbmParams>& stack,
                                  int layer, Rng& rng);

/// Full <v h> matrix where the coarse variables come from `steps`
/// applications of block_spin.
std::vector<double> vh_matrix_rg(const SampleSet& samples, int steps, Rng& rng);

VhCorrelationMap vh_map_rbm(const SampleSet& samples, const std::vector<RbmParams>& stack,
                            int layer, int hidden_index, Rng& rng);

VhCorrelationMap vh_map_rg(const SampleSet& samples, int steps, int block_index, Rng& rng);

/// Extracts one column of a full matrix as a map (shared by the CLI export).
VhCorrelationMap vh_map_from_matrix(const std::vector<double>& matrix, int n_visible,
                                    int n_coarse, int layer, int index);

}  // namespace lrising
