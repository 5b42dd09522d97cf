#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lrising/geometry.hpp"
#include "lrising/mcmc.hpp"
#include "lrising/rng.hpp"

namespace lrising {

/// One-hidden-layer tanh classifier over spin configurations with a
/// soft-normalized output across the temperature classes. The input lattice
/// size is fixed at training time; coarse-grained lattices need their own
/// per-size model.
struct ThermometerModel {
    int input_dim = 0;
    int hidden_width = 0;
    std::vector<double> class_temperatures;  // ascending
    std::vector<double> w1;                  // [hidden][input] row-major
    std::vector<double> b1;                  // hidden
    std::vector<double> w2;                  // [classes][hidden] row-major
    std::vector<double> b2;                  // classes

    int n_classes() const { return static_cast<int>(class_temperatures.size()); }
};

struct ThermometerTrainConfig {
    int epochs = 50;
    double learning_rate = 1e-3;
    std::int64_t batch_size = 100;
    int hidden_width = 64;
    double holdout_fraction = 0.1;
    std::uint64_t seed = 0;
    /// Augment the training split with globally flipped copies. At mu = 0
    /// the Boltzmann ensemble is exactly flip-symmetric; a single finite
    /// chain per temperature breaks that spuriously and would make the
    /// classifier sensitive to the arbitrary magnetization sign.
    bool symmetrize = true;
};

struct ThermometerTrainResult {
    ThermometerModel model;
    double holdout_accuracy = 0.0;
    std::vector<double> epoch_loss;  // mean training cross-entropy per epoch
};

/// Cross-entropy training by mini-batch gradient descent; deterministic from
/// the seed. Labels must match entries of `class_temperatures` (1e-9
/// tolerance). A 10% (holdout_fraction) split is held out for the reported
/// accuracy.
ThermometerTrainResult train_thermometer(
    const std::vector<std::pair<SpinGrid, double>>& labeled,
    const std::vector<double>& class_temperatures, const ThermometerTrainConfig& cfg);

/// Per-configuration class probabilities (sum to 1 within 1e-9).
std::vector<double> class_probabilities(const ThermometerModel& model, const SpinGrid& grid);

struct TemperatureMeasurement {
    std::vector<double> probabilities;  // ensemble mean, one per class
    double mean_temperature = 0.0;      // probability-weighted
    double argmax_temperature = 0.0;
};

/// Ensemble average of per-configuration class probabilities.
TemperatureMeasurement measure(const ThermometerModel& model, const SampleSet& samples);

/// Gradient of the summed cross-entropy over a batch, laid out as
/// (w1, b1, w2, b2) flattened; used by training and by the gradient checks.
std::vector<double> thermometer_loss_gradient(const ThermometerModel& model,
                                              const std::vector<const SpinGrid*>& batch,
                                              const std::vector<int>& labels, double* loss_out);

}  // namespace lrising
