#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrising/rng.hpp"

namespace lrising {

/// A visible or hidden layer state; entries are -1 or +1.
using NodeState = std::vector<std::int8_t>;

/// Weights and biases of a binary +-1 RBM.
struct RbmParams {
    int n_visible = 0;
    int n_hidden = 0;
    std::vector<double> weights;       // [n_visible][n_hidden] row-major
    std::vector<double> visible_bias;  // n_visible
    std::vector<double> hidden_bias;   // n_hidden

    static RbmParams zeros(int n_visible, int n_hidden);
    /// Weights i.i.d. N(0, stddev^2), biases zero.
    static RbmParams gaussian(int n_visible, int n_hidden, double stddev, Rng& rng);

    double weight(int i, int a) const { return weights[static_cast<std::size_t>(i) * n_hidden + a]; }
    double& weight(int i, int a) { return weights[static_cast<std::size_t>(i) * n_hidden + a]; }
};

/// E(v, h) = -v^T W h - b_v . v - b_h . h.
double rbm_energy(const NodeState& v, const NodeState& h, const RbmParams& p);

/// tanh(W^T v + b_h): conditional expectation of each hidden unit.
std::vector<double> hidden_expectation(const NodeState& v, const RbmParams& p);
/// tanh(W h + b_v): conditional expectation of each visible unit.
std::vector<double> visible_expectation(const NodeState& h, const RbmParams& p);

struct ConditionalSample {
    std::vector<double> expectation;  // per-unit tanh activation, in (-1, 1)
    NodeState state;                  // sampled, P(+1) = (1 + expectation) / 2
};

ConditionalSample hidden_given_visible(const NodeState& v, const RbmParams& p, Rng& rng);
ConditionalSample visible_given_hidden(const NodeState& h, const RbmParams& p, Rng& rng);

struct TrainConfig {
    std::int64_t steps = 30000;
    double learning_rate = 1e-3;
    std::int64_t batch_size = 1000;
    int cd_k = 1;  // Gibbs half-step pairs in the reconstruction chain
    std::uint64_t seed = 0;
    /// Use tanh expectations instead of sampled hidden states in the data
    /// term of the update (variance-reduction variant). The reconstruction
    /// chain always uses sampled states.
    bool data_hidden_mean_field = false;
};

/// One contrastive-divergence update over `batch`, applied in place:
///   W   += lr * (<v h>_data - <v h>_model)
///   b_v += lr * (<v>_data   - <v>_model)
///   b_h += lr * (<h>_data   - <h>_model)
/// with model expectations from the CD-k reconstruction chain. Returns the
/// fraction of visible sites mismatched between data and reconstruction.
double cd_update(RbmParams& p, std::span<const NodeState> batch, const TrainConfig& cfg,
                 Rng& rng);

struct TrainTrace {
    std::vector<double> reconstruction_error;  // one entry per step
};

struct TrainResult {
    RbmParams params;
    TrainTrace trace;
};

/// CD training over shuffled mini-batches; deterministic from cfg.seed.
TrainResult train_rbm(const std::vector<NodeState>& data, int n_hidden, const TrainConfig& cfg);

/// Visible-state bitmask encoding: bit i set means unit i is +1.
std::uint32_t state_index(const NodeState& state);
NodeState state_from_index(std::uint32_t index, int n_units);

/// Exact partition function and visible marginal, for n_visible + n_hidden
/// <= 20. Hidden units are marginalized in closed form; everything is
/// accumulated in log space.
struct ExactRbmDistribution {
    double z = 0.0;
    double log_z = 0.0;
    std::vector<double> visible_prob;  // [state_index(v)]

    double probability_of(const NodeState& v) const { return visible_prob[state_index(v)]; }
};

ExactRbmDistribution exact_partition(const RbmParams& p);

/// Exact KL divergence D(q || p_model) and its exact parameter gradient.
/// `data_distribution` is indexed by visible state bitmask and must be
/// normalized to 1 within 1e-9.
struct ExactKl {
    double kl = 0.0;
    RbmParams gradient;  // same shape as the parameters
};

ExactKl exact_kl(const std::vector<double>& data_distribution, const RbmParams& p);

}  // namespace lrising
