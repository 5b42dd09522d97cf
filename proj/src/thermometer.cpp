#include "lrising/thermometer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lrising {

namespace {

int class_of_label(const std::vector<double>& class_temperatures, double label) {
    for (std::size_t c = 0; c < class_temperatures.size(); ++c) {
        if (std::abs(class_temperatures[c] - label) <= 1e-9) return static_cast<int>(c);
    }
    throw std::invalid_argument("temperature label " + std::to_string(label) +
                                " is not in the class grid");
}

struct Forward {
    std::vector<double> hidden;  // tanh activations
    std::vector<double> probs;   // softmax output
};

void forward_pass(const ThermometerModel& m, const SpinGrid& grid, Forward& fwd) {
    const int n = m.input_dim, hw = m.hidden_width, nc = m.n_classes();
    fwd.hidden.resize(static_cast<std::size_t>(hw));
    fwd.probs.resize(static_cast<std::size_t>(nc));
    const std::int8_t* x = grid.values().data();
    for (int h = 0; h < hw; ++h) {
        const double* row = m.w1.data() + static_cast<std::size_t>(h) * n;
        double z = m.b1[static_cast<std::size_t>(h)];
        for (int i = 0; i < n; ++i) z += row[i] * x[i];
        fwd.hidden[static_cast<std::size_t>(h)] = std::tanh(z);
    }
    double z_max = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < nc; ++c) {
        const double* row = m.w2.data() + static_cast<std::size_t>(c) * hw;
        double z = m.b2[static_cast<std::size_t>(c)];
        for (int h = 0; h < hw; ++h) z += row[h] * fwd.hidden[static_cast<std::size_t>(h)];
        fwd.probs[static_cast<std::size_t>(c)] = z;
        z_max = std::max(z_max, z);
    }
    double sum = 0.0;
    for (auto& p : fwd.probs) {
        p = std::exp(p - z_max);
        sum += p;
    }
    for (auto& p : fwd.probs) p /= sum;
}

struct GradView {
    double* w1;
    double* b1;
    double* w2;
    double* b2;
};

GradView split_gradient(const ThermometerModel& m, std::vector<double>& flat) {
    const std::size_t n1 = m.w1.size(), n2 = m.b1.size(), n3 = m.w2.size();
    return GradView{flat.data(), flat.data() + n1, flat.data() + n1 + n2,
                    flat.data() + n1 + n2 + n3};
}

// Accumulates the cross-entropy gradient of one example into `grad`.
void backward_pass(const ThermometerModel& m, const SpinGrid& grid, int label,
                   const Forward& fwd, GradView grad, std::vector<double>& dz1) {
    const int n = m.input_dim, hw = m.hidden_width, nc = m.n_classes();
    dz1.assign(static_cast<std::size_t>(hw), 0.0);
    for (int c = 0; c < nc; ++c) {
        const double dz2 = fwd.probs[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0);
        double* grow = grad.w2 + static_cast<std::size_t>(c) * hw;
        const double* w2row = m.w2.data() + static_cast<std::size_t>(c) * hw;
        for (int h = 0; h < hw; ++h) {
            grow[h] += dz2 * fwd.hidden[static_cast<std::size_t>(h)];
            dz1[static_cast<std::size_t>(h)] += dz2 * w2row[h];
        }
        grad.b2[c] += dz2;
    }
    const std::int8_t* x = grid.values().data();
    for (int h = 0; h < hw; ++h) {
        const double a = fwd.hidden[static_cast<std::size_t>(h)];
        const double d = dz1[static_cast<std::size_t>(h)] * (1.0 - a * a);
        double* grow = grad.w1 + static_cast<std::size_t>(h) * n;
        for (int i = 0; i < n; ++i) grow[i] += d * x[i];
        grad.b1[h] += d;
    }
}

}  // namespace

std::vector<double> thermometer_loss_gradient(const ThermometerModel& model,
                                              const std::vector<const SpinGrid*>& batch,
                                              const std::vector<int>& labels, double* loss_out) {
    std::vector<double> flat(model.w1.size() + model.b1.size() + model.w2.size() + model.b2.size(),
                             0.0);
    GradView grad = split_gradient(model, flat);
    Forward fwd;
    std::vector<double> dz1;
    double loss = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        forward_pass(model, *batch[k], fwd);
        loss -= std::log(std::max(fwd.probs[static_cast<std::size_t>(labels[k])], 1e-300));
        backward_pass(model, *batch[k], labels[k], fwd, grad, dz1);
    }
    if (loss_out) *loss_out = loss;
    return flat;
}

ThermometerTrainResult train_thermometer(
    const std::vector<std::pair<SpinGrid, double>>& labeled,
    const std::vector<double>& class_temperatures, const ThermometerTrainConfig& cfg) {
    if (labeled.empty()) throw std::invalid_argument("no labeled configurations");
    if (class_temperatures.empty()) throw std::invalid_argument("class grid is empty");
    if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (!(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0)) {
        throw std::invalid_argument("holdout_fraction must be in [0, 1)");
    }

    const int input_dim = labeled.front().first.site_count();
    std::vector<int> labels(labeled.size());
    for (std::size_t k = 0; k < labeled.size(); ++k) {
        if (labeled[k].first.site_count() != input_dim) {
            throw std::invalid_argument("labeled grids have mixed sizes");
        }
        labels[k] = class_of_label(class_temperatures, labeled[k].second);
    }

    Rng rng(cfg.seed);
    ThermometerTrainResult result;
    ThermometerModel& m = result.model;
    m.input_dim = input_dim;
    m.hidden_width = cfg.hidden_width;
    m.class_temperatures = class_temperatures;
    std::sort(m.class_temperatures.begin(), m.class_temperatures.end());
    const int nc = m.n_classes();
    m.w1.resize(static_cast<std::size_t>(cfg.hidden_width) * input_dim);
    m.b1.assign(static_cast<std::size_t>(cfg.hidden_width), 0.0);
    m.w2.resize(static_cast<std::size_t>(nc) * cfg.hidden_width);
    m.b2.assign(static_cast<std::size_t>(nc), 0.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_width));
    for (auto& w : m.w1) w = s1 * rng.normal();
    for (auto& w : m.w2) w = s2 * rng.normal();

    // Remap labels onto the sorted grid.
    for (std::size_t k = 0; k < labeled.size(); ++k) {
        labels[k] = class_of_label(m.class_temperatures, labeled[k].second);
    }

    // Seeded split: the tail of one shuffle is held out.
    std::vector<std::size_t> order(labeled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.below(i + 1)]);
    }
    const auto n_holdout = static_cast<std::size_t>(
        std::floor(cfg.holdout_fraction * static_cast<double>(labeled.size())));
    const std::size_t n_originals = labeled.size() - n_holdout;
    if (n_originals == 0) throw std::invalid_argument("holdout leaves no training data");
    const std::vector<std::size_t> holdout_idx(
        order.begin() + static_cast<std::ptrdiff_t>(n_originals), order.end());

    // Training pool, optionally doubled with flipped copies. The holdout is
    // split off before augmentation so mirrored pairs never straddle it.
    std::vector<const SpinGrid*> pool;
    std::vector<int> pool_labels;
    std::vector<SpinGrid> mirrored;
    pool.reserve(cfg.symmetrize ? 2 * n_originals : n_originals);
    if (cfg.symmetrize) mirrored.reserve(n_originals);
    for (std::size_t k = 0; k < n_originals; ++k) {
        pool.push_back(&labeled[order[k]].first);
        pool_labels.push_back(labels[order[k]]);
    }
    if (cfg.symmetrize) {
        for (std::size_t k = 0; k < n_originals; ++k) {
            mirrored.push_back(labeled[order[k]].first.flipped());
            pool.push_back(&mirrored.back());
            pool_labels.push_back(labels[order[k]]);
        }
    }
    const std::size_t n_train = pool.size();

    std::vector<std::size_t> train_idx(n_train);
    std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});

    const auto batch_size = static_cast<std::size_t>(
        std::clamp<std::int64_t>(cfg.batch_size, 1, static_cast<std::int64_t>(n_train)));
    std::vector<const SpinGrid*> batch;
    std::vector<int> batch_labels;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = train_idx.size() - 1; i > 0; --i) {
            std::swap(train_idx[i], train_idx[rng.below(i + 1)]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n_train; start += batch_size) {
            const std::size_t stop = std::min(start + batch_size, n_train);
            batch.clear();
            batch_labels.clear();
            for (std::size_t k = start; k < stop; ++k) {
                batch.push_back(pool[train_idx[k]]);
                batch_labels.push_back(pool_labels[train_idx[k]]);
            }
            double loss = 0.0;
            std::vector<double> grad = thermometer_loss_gradient(m, batch, batch_labels, &loss);
            epoch_loss += loss;
            const double scale = cfg.learning_rate / static_cast<double>(batch.size());
            GradView view = split_gradient(m, grad);
            for (std::size_t k = 0; k < m.w1.size(); ++k) m.w1[k] -= scale * view.w1[k];
            for (std::size_t k = 0; k < m.b1.size(); ++k) m.b1[k] -= scale * view.b1[k];
            for (std::size_t k = 0; k < m.w2.size(); ++k) m.w2[k] -= scale * view.w2[k];
            for (std::size_t k = 0; k < m.b2.size(); ++k) m.b2[k] -= scale * view.b2[k];
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(n_train));
    }

    if (!holdout_idx.empty()) {
        std::size_t correct = 0;
        Forward fwd;
        for (const std::size_t k : holdout_idx) {
            forward_pass(m, labeled[k].first, fwd);
            const auto arg = static_cast<int>(
                std::max_element(fwd.probs.begin(), fwd.probs.end()) - fwd.probs.begin());
            correct += arg == labels[k];
        }
        result.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(holdout_idx.size());
    }
    return result;
}

std::vector<double> class_probabilities(const ThermometerModel& model, const SpinGrid& grid) {
    if (grid.site_count() != model.input_dim) {
        throw std::invalid_argument("grid size does not match the thermometer input dimension");
    }
    Forward fwd;
    forward_pass(model, grid, fwd);
    return fwd.probs;
}

TemperatureMeasurement measure(const ThermometerModel& model, const SampleSet& samples) {
    if (samples.grids.empty()) throw std::invalid_argument("empty sample set");
    TemperatureMeasurement out;
    out.probabilities.assign(static_cast<std::size_t>(model.n_classes()), 0.0);
    for (const auto& grid : samples.grids) {
        const std::vector<double> probs = class_probabilities(model, grid);
        for (std::size_t c = 0; c < probs.size(); ++c) out.probabilities[c] += probs[c];
    }
    for (auto& p : out.probabilities) p /= static_cast<double>(samples.grids.size());
    double mean = 0.0;
    for (std::size_t c = 0; c < out.probabilities.size(); ++c) {
        mean += out.probabilities[c] * model.class_temperatures[c];
    }
    out.mean_temperature = mean;
    const auto arg = static_cast<std::size_t>(
        std::max_element(out.probabilities.begin(), out.probabilities.end()) -
        out.probabilities.begin());
    out.argmax_temperature = model.class_temperatures[arg];
    return out;
}

}  // namespace lrising
