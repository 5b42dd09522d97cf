#include "lrising/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lrising {

namespace {

void require_dims(const RbmParams& p) {
    if (p.n_visible < 1 || p.n_hidden < 1) throw std::invalid_argument("RBM dimensions must be >= 1");
    const auto nv = static_cast<std::size_t>(p.n_visible);
    const auto nh = static_cast<std::size_t>(p.n_hidden);
    if (p.weights.size() != nv * nh || p.visible_bias.size() != nv || p.hidden_bias.size() != nh) {
        throw std::invalid_argument("RBM parameter arrays do not match the declared dimensions");
    }
}

void require_state(const NodeState& s, int n, const char* which) {
    if (static_cast<int>(s.size()) != n) {
        throw std::invalid_argument(std::string(which) + " state size does not match the RBM");
    }
}

// act = b_h + W^T v
void hidden_activation(const RbmParams& p, const std::int8_t* v, double* act) {
    std::copy(p.hidden_bias.begin(), p.hidden_bias.end(), act);
    const int nh = p.n_hidden;
    for (int i = 0; i < p.n_visible; ++i) {
        const double* row = p.weights.data() + static_cast<std::size_t>(i) * nh;
        if (v[i] > 0) {
            for (int a = 0; a < nh; ++a) act[a] += row[a];
        } else {
            for (int a = 0; a < nh; ++a) act[a] -= row[a];
        }
    }
}

// act = b_v + W h, with h given as +-1 doubles
void visible_activation(const RbmParams& p, const double* h, double* act) {
    const int nh = p.n_hidden;
    for (int i = 0; i < p.n_visible; ++i) {
        const double* row = p.weights.data() + static_cast<std::size_t>(i) * nh;
        double sum = p.visible_bias[static_cast<std::size_t>(i)];
        for (int a = 0; a < nh; ++a) sum += row[a] * h[a];
        act[i] = sum;
    }
}

// P(+1) = (1 + tanh(act)) / 2; writes tanh into `expectation` when non-null.
std::int8_t sample_unit(double act, Rng& rng, double* expectation) {
    const double t = std::tanh(act);
    if (expectation) *expectation = t;
    return rng.uniform() < 0.5 * (1.0 + t) ? std::int8_t{+1} : std::int8_t{-1};
}

struct CdScratch {
    std::vector<double> act_h, act_v, h_data, h_model, v_model;
    std::vector<std::int8_t> h_state, v_state;
    std::vector<double> d_weights, d_visible, d_hidden;

    void resize(const RbmParams& p) {
        act_h.resize(static_cast<std::size_t>(p.n_hidden));
        act_v.resize(static_cast<std::size_t>(p.n_visible));
        h_data.resize(static_cast<std::size_t>(p.n_hidden));
        h_model.resize(static_cast<std::size_t>(p.n_hidden));
        v_model.resize(static_cast<std::size_t>(p.n_visible));
        h_state.resize(static_cast<std::size_t>(p.n_hidden));
        v_state.resize(static_cast<std::size_t>(p.n_visible));
        d_weights.assign(p.weights.size(), 0.0);
        d_visible.assign(p.visible_bias.size(), 0.0);
        d_hidden.assign(p.hidden_bias.size(), 0.0);
    }
};

// One CD-k update; `example_of` maps [0, batch_size) to training vectors.
template <typename ExampleOf>
double cd_update_impl(RbmParams& p, std::int64_t batch_size, ExampleOf&& example_of,
                      const TrainConfig& cfg, Rng& rng, CdScratch& scratch) {
    if (batch_size < 1) throw std::invalid_argument("batch must be nonempty");
    if (cfg.cd_k < 1) throw std::invalid_argument("cd_k must be >= 1");
    scratch.resize(p);
    const int nv = p.n_visible, nh = p.n_hidden;

    std::int64_t mismatches = 0;
    for (std::int64_t b = 0; b < batch_size; ++b) {
        const NodeState& v_data = example_of(b);
        require_state(v_data, nv, "visible");

        hidden_activation(p, v_data.data(), scratch.act_h.data());
        for (int a = 0; a < nh; ++a) {
            double expectation;
            scratch.h_state[static_cast<std::size_t>(a)] =
                sample_unit(scratch.act_h[static_cast<std::size_t>(a)], rng, &expectation);
            scratch.h_data[static_cast<std::size_t>(a)] =
                cfg.data_hidden_mean_field ? expectation
                                           : static_cast<double>(scratch.h_state[static_cast<std::size_t>(a)]);
        }

        // Data term.
        for (int i = 0; i < nv; ++i) {
            const double vi = v_data[static_cast<std::size_t>(i)];
            double* drow = scratch.d_weights.data() + static_cast<std::size_t>(i) * nh;
            const double* hd = scratch.h_data.data();
            for (int a = 0; a < nh; ++a) drow[a] += vi * hd[a];
            scratch.d_visible[static_cast<std::size_t>(i)] += vi;
        }
        for (int a = 0; a < nh; ++a) scratch.d_hidden[static_cast<std::size_t>(a)] += scratch.h_data[static_cast<std::size_t>(a)];

        // Reconstruction chain v -> h -> v' -> h', k pairs, sampled states.
        for (int t = 0; t < cfg.cd_k; ++t) {
            for (int a = 0; a < nh; ++a) scratch.h_model[static_cast<std::size_t>(a)] = scratch.h_state[static_cast<std::size_t>(a)];
            visible_activation(p, scratch.h_model.data(), scratch.act_v.data());
            for (int i = 0; i < nv; ++i) {
                scratch.v_state[static_cast<std::size_t>(i)] = sample_unit(scratch.act_v[static_cast<std::size_t>(i)], rng, nullptr);
                scratch.v_model[static_cast<std::size_t>(i)] = scratch.v_state[static_cast<std::size_t>(i)];
            }
            hidden_activation(p, scratch.v_state.data(), scratch.act_h.data());
            for (int a = 0; a < nh; ++a) {
                scratch.h_state[static_cast<std::size_t>(a)] = sample_unit(scratch.act_h[static_cast<std::size_t>(a)], rng, nullptr);
            }
        }

        // Model term, negated.
        for (int i = 0; i < nv; ++i) {
            const double vi = scratch.v_model[static_cast<std::size_t>(i)];
            double* drow = scratch.d_weights.data() + static_cast<std::size_t>(i) * nh;
            for (int a = 0; a < nh; ++a) drow[a] -= vi * scratch.h_state[static_cast<std::size_t>(a)];
            scratch.d_visible[static_cast<std::size_t>(i)] -= vi;
            mismatches += v_data[static_cast<std::size_t>(i)] != scratch.v_state[static_cast<std::size_t>(i)];
        }
        for (int a = 0; a < nh; ++a) scratch.d_hidden[static_cast<std::size_t>(a)] -= scratch.h_state[static_cast<std::size_t>(a)];
    }

    const double scale = cfg.learning_rate / static_cast<double>(batch_size);
    for (std::size_t k = 0; k < p.weights.size(); ++k) p.weights[k] += scale * scratch.d_weights[k];
    for (std::size_t k = 0; k < p.visible_bias.size(); ++k) p.visible_bias[k] += scale * scratch.d_visible[k];
    for (std::size_t k = 0; k < p.hidden_bias.size(); ++k) p.hidden_bias[k] += scale * scratch.d_hidden[k];

    return static_cast<double>(mismatches) / (static_cast<double>(batch_size) * nv);
}

}  // namespace

RbmParams RbmParams::zeros(int n_visible, int n_hidden) {
    RbmParams p;
    p.n_visible = n_visible;
    p.n_hidden = n_hidden;
    p.weights.assign(static_cast<std::size_t>(n_visible) * n_hidden, 0.0);
    p.visible_bias.assign(static_cast<std::size_t>(n_visible), 0.0);
    p.hidden_bias.assign(static_cast<std::size_t>(n_hidden), 0.0);
    require_dims(p);
    return p;
}

RbmParams RbmParams::gaussian(int n_visible, int n_hidden, double stddev, Rng& rng) {
    RbmParams p = zeros(n_visible, n_hidden);
    for (auto& w : p.weights) w = stddev * rng.normal();
    return p;
}

double rbm_energy(const NodeState& v, const NodeState& h, const RbmParams& p) {
    require_dims(p);
    require_state(v, p.n_visible, "visible");
    require_state(h, p.n_hidden, "hidden");
    double energy = 0.0;
    for (int i = 0; i < p.n_visible; ++i) {
        const double* row = p.weights.data() + static_cast<std::size_t>(i) * p.n_hidden;
        double coupled = 0.0;
        for (int a = 0; a < p.n_hidden; ++a) coupled += row[a] * h[static_cast<std::size_t>(a)];
        energy -= v[static_cast<std::size_t>(i)] * (coupled + p.visible_bias[static_cast<std::size_t>(i)]);
    }
    for (int a = 0; a < p.n_hidden; ++a) energy -= p.hidden_bias[static_cast<std::size_t>(a)] * h[static_cast<std::size_t>(a)];
    return energy;
}

std::vector<double> hidden_expectation(const NodeState& v, const RbmParams& p) {
    require_dims(p);
    require_state(v, p.n_visible, "visible");
    std::vector<double> act(static_cast<std::size_t>(p.n_hidden));
    hidden_activation(p, v.data(), act.data());
    for (auto& x : act) x = std::tanh(x);
    return act;
}

std::vector<double> visible_expectation(const NodeState& h, const RbmParams& p) {
    require_dims(p);
    require_state(h, p.n_hidden, "hidden");
    std::vector<double> hd(h.begin(), h.end());
    std::vector<double> act(static_cast<std::size_t>(p.n_visible));
    visible_activation(p, hd.data(), act.data());
    for (auto& x : act) x = std::tanh(x);
    return act;
}

ConditionalSample hidden_given_visible(const NodeState& v, const RbmParams& p, Rng& rng) {
    require_dims(p);
    require_state(v, p.n_visible, "visible");
    ConditionalSample out;
    out.expectation.resize(static_cast<std::size_t>(p.n_hidden));
    out.state.resize(static_cast<std::size_t>(p.n_hidden));
    hidden_activation(p, v.data(), out.expectation.data());
    for (int a = 0; a < p.n_hidden; ++a) {
        out.state[static_cast<std::size_t>(a)] =
            sample_unit(out.expectation[static_cast<std::size_t>(a)], rng, &out.expectation[static_cast<std::size_t>(a)]);
    }
    return out;
}

ConditionalSample visible_given_hidden(const NodeState& h, const RbmParams& p, Rng& rng) {
    require_dims(p);
    require_state(h, p.n_hidden, "hidden");
    ConditionalSample out;
    out.expectation.resize(static_cast<std::size_t>(p.n_visible));
    out.state.resize(static_cast<std::size_t>(p.n_visible));
    std::vector<double> hd(h.begin(), h.end());
    visible_activation(p, hd.data(), out.expectation.data());
    for (int i = 0; i < p.n_visible; ++i) {
        out.state[static_cast<std::size_t>(i)] =
            sample_unit(out.expectation[static_cast<std::size_t>(i)], rng, &out.expectation[static_cast<std::size_t>(i)]);
    }
    return out;
}

double cd_update(RbmParams& p, std::span<const NodeState> batch, const TrainConfig& cfg,
                 Rng& rng) {
    require_dims(p);
    CdScratch scratch;
    return cd_update_impl(
        p, static_cast<std::int64_t>(batch.size()),
        [&](std::int64_t b) -> const NodeState& { return batch[static_cast<std::size_t>(b)]; },
        cfg, rng, scratch);
}

TrainResult train_rbm(const std::vector<NodeState>& data, int n_hidden, const TrainConfig& cfg) {
    if (data.empty()) throw std::invalid_argument("training set is empty");
    if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (cfg.batch_size < 1 || cfg.batch_size > static_cast<std::int64_t>(data.size())) {
        throw std::invalid_argument("batch_size must be in [1, training-set size]");
    }
    if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
    const int nv = static_cast<int>(data.front().size());
    for (const auto& v : data) require_state(v, nv, "training");

    Rng rng(cfg.seed);
    TrainResult result;
    result.params = RbmParams::gaussian(nv, n_hidden, 0.01, rng);
    result.trace.reconstruction_error.reserve(static_cast<std::size_t>(cfg.steps));

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();  // force an initial shuffle

    CdScratch scratch;
    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        if (cursor + static_cast<std::size_t>(cfg.batch_size) > order.size()) {
            for (std::size_t i = order.size() - 1; i > 0; --i) {
                std::swap(order[i], order[rng.below(i + 1)]);
            }
            cursor = 0;
        }
        const std::size_t base = cursor;
        const double err = cd_update_impl(
            result.params, cfg.batch_size,
            [&](std::int64_t b) -> const NodeState& { return data[order[base + static_cast<std::size_t>(b)]]; },
            cfg, rng, scratch);
        cursor += static_cast<std::size_t>(cfg.batch_size);
        result.trace.reconstruction_error.push_back(err);
    }
    return result;
}

std::uint32_t state_index(const NodeState& state) {
    if (state.size() > 31) throw std::invalid_argument("state too large to index");
    std::uint32_t index = 0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i] > 0) index |= (1u << i);
    }
    return index;
}

NodeState state_from_index(std::uint32_t index, int n_units) {
    NodeState state(static_cast<std::size_t>(n_units));
    for (int i = 0; i < n_units; ++i) {
        state[static_cast<std::size_t>(i)] = (index >> i) & 1 ? std::int8_t{+1} : std::int8_t{-1};
    }
    return state;
}

namespace {

// log(2 cosh(x)) without overflow.
double log_2cosh(double x) {
    const double ax = std::abs(x);
    return ax + std::log1p(std::exp(-2.0 * ax));
}

// Log-weight of a visible state with hidden units marginalized out.
double log_unnormalized(const RbmParams& p, const NodeState& v, std::vector<double>& act) {
    hidden_activation(p, v.data(), act.data());
    double lw = 0.0;
    for (int i = 0; i < p.n_visible; ++i) lw += p.visible_bias[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    for (int a = 0; a < p.n_hidden; ++a) lw += log_2cosh(act[static_cast<std::size_t>(a)]);
    return lw;
}

}  // namespace

ExactRbmDistribution exact_partition(const RbmParams& p) {
    require_dims(p);
    if (p.n_visible + p.n_hidden > 20) {
        throw std::invalid_argument("exact partition limited to n_visible + n_hidden <= 20");
    }
    const std::uint32_t n_states = 1u << p.n_visible;
    std::vector<double> log_w(n_states);
    std::vector<double> act(static_cast<std::size_t>(p.n_hidden));
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::uint32_t idx = 0; idx < n_states; ++idx) {
        log_w[idx] = log_unnormalized(p, state_from_index(idx, p.n_visible), act);
        max_lw = std::max(max_lw, log_w[idx]);
    }
    double sum = 0.0;
    for (std::uint32_t idx = 0; idx < n_states; ++idx) sum += std::exp(log_w[idx] - max_lw);

    ExactRbmDistribution out;
    out.log_z = max_lw + std::log(sum);
    out.z = std::exp(out.log_z);
    out.visible_prob.resize(n_states);
    for (std::uint32_t idx = 0; idx < n_states; ++idx) {
        out.visible_prob[idx] = std::exp(log_w[idx] - out.log_z);
    }
    return out;
}

ExactKl exact_kl(const std::vector<double>& data_distribution, const RbmParams& p) {
    require_dims(p);
    if (p.n_visible + p.n_hidden > 20) {
        throw std::invalid_argument("exact KL limited to n_visible + n_hidden <= 20");
    }
    const std::uint32_t n_states = 1u << p.n_visible;
    if (data_distribution.size() != n_states) {
        throw std::invalid_argument("data distribution size does not match 2^n_visible");
    }
    double total = 0.0;
    for (const double q : data_distribution) {
        if (!(q >= 0.0)) throw std::invalid_argument("data distribution has negative entries");
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("data distribution is not normalized");
    }

    const ExactRbmDistribution model = exact_partition(p);

    ExactKl out;
    out.gradient = RbmParams::zeros(p.n_visible, p.n_hidden);
    std::vector<double> act(static_cast<std::size_t>(p.n_hidden));
    for (std::uint32_t idx = 0; idx < n_states; ++idx) {
        const double q = data_distribution[idx];
        const double pv = model.visible_prob[idx];
        if (q > 0.0) out.kl += q * std::log(q / pv);

        // d KL / d theta = E_model[d(-E)/d theta] - E_data[d(-E)/d theta],
        // with hidden units entering through their conditional expectations.
        const double w = pv - q;
        if (w == 0.0) continue;
        const NodeState v = state_from_index(idx, p.n_visible);
        hidden_activation(p, v.data(), act.data());
        for (int a = 0; a < p.n_hidden; ++a) act[static_cast<std::size_t>(a)] = std::tanh(act[static_cast<std::size_t>(a)]);
        for (int i = 0; i < p.n_visible; ++i) {
            const double vi = v[static_cast<std::size_t>(i)];
            double* grow = out.gradient.weights.data() + static_cast<std::size_t>(i) * p.n_hidden;
            for (int a = 0; a < p.n_hidden; ++a) grow[a] += w * vi * act[static_cast<std::size_t>(a)];
            out.gradient.visible_bias[static_cast<std::size_t>(i)] += w * vi;
        }
        for (int a = 0; a < p.n_hidden; ++a) out.gradient.hidden_bias[static_cast<std::size_t>(a)] += w * act[static_cast<std::size_t>(a)];
    }
    return out;
}

}  // namespace lrising
