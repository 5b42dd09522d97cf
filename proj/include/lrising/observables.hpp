#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lrising/geometry.hpp"
#include "lrising/mcmc.hpp"

namespace lrising {

/// One distance class of a two-point correlator.
struct CorrelatorBin {
    double distance = 0.0;
    double value = 0.0;
    std::int64_t count = 0;  // (sample, unordered pair) contributions
    double std_err = 0.0;    // over per-sample bin means
};

/// Correlator binned by exact minimum-image distance, distances strictly
/// increasing. The r = 0 bin is included.
struct CorrelatorProfile {
    std::vector<CorrelatorBin> bins;
};

/// Result of a log-log least-squares fit C(r) = B * r^(-2 delta).
struct PowerLawFit {
    double delta = 0.0;
    double amplitude = 0.0;
    double residual = 0.0;       // RMS of log-log residuals
    double delta_std_err = 0.0;  // from the OLS slope variance
    double r_min = 0.0;
    double r_max = 0.0;
    int n_bins_used = 0;
};

/// Per-site energy density over a sample set. `values` holds the raw
/// epsilon_i = s_i * local_field(i) per sample; `mean_field` is its
/// per-site ensemble mean. The centered operator is values - mean_field.
struct EnergyDensityField {
    int side = 0;
    std::size_t n_samples = 0;
    std::vector<std::vector<double>> values;  // [sample][site]
    std::vector<double> mean_field;           // [site]
};

/// (sum_i s_i) / N.
double magnetization(const SpinGrid& grid);

/// Raw two-point spin correlator <s_i s_j>, averaged over all site pairs
/// and samples, binned by minimum-image distance. With `connected` the
/// ensemble <s>^2 is subtracted from every bin (diagnostic; the default
/// raw form is what the power-law fits consume).
CorrelatorProfile spin_correlator(const SampleSet& samples, bool connected = false);

EnergyDensityField energy_density(const SampleSet& samples, const CouplingKernel& kernel);

/// Two-point correlator of the mean-subtracted energy density.
CorrelatorProfile energy_correlator(const SampleSet& samples, const CouplingKernel& kernel);

/// Least-squares line through (log r, log C) using bins with r in
/// [r_min, r_max], r > 0 and C(r) > 0. Throws if fewer than 3 bins remain
/// (correlator noise floor reached).
PowerLawFit fit_power_law(const CorrelatorProfile& profile, double r_min, double r_max);

/// First crossing of delta_eps through 1, scanning in increasing T, located
/// by linear interpolation. Non-finite entries are ignored. Throws when the
/// curve never crosses.
double find_tc(std::vector<std::pair<double, double>> delta_eps_vs_temperature);

}  // namespace lrising
