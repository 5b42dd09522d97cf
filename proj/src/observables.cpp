#include "lrising/observables.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace lrising {

namespace {

// Distance classes over torus displacements, keyed by integer squared
// minimum-image distance so binning is exact. Class 0 is r = 0.
struct DistanceClasses {
    std::vector<int> class_of_displacement;  // [dy * L + dx]
    std::vector<double> distances;           // ascending, distances[0] = 0
    std::vector<int> displacements_per_class;
};

DistanceClasses build_classes(int side) {
    std::map<long, int> r2_to_class;
    for (int dy = 0; dy < side; ++dy) {
        for (int dx = 0; dx < side; ++dx) {
            const long mx = std::min(dx, side - dx);
            const long my = std::min(dy, side - dy);
            r2_to_class.emplace(mx * mx + my * my, 0);
        }
    }
    DistanceClasses classes;
    int index = 0;
    for (auto& [r2, cls] : r2_to_class) {
        cls = index++;
        classes.distances.push_back(std::sqrt(static_cast<double>(r2)));
    }
    classes.class_of_displacement.resize(static_cast<std::size_t>(side) * side);
    classes.displacements_per_class.assign(classes.distances.size(), 0);
    for (int dy = 0; dy < side; ++dy) {
        for (int dx = 0; dx < side; ++dx) {
            const long mx = std::min(dx, side - dx);
            const long my = std::min(dy, side - dy);
            const int cls = r2_to_class.at(mx * mx + my * my);
            classes.class_of_displacement[static_cast<std::size_t>(dy) * side + dx] = cls;
            ++classes.displacements_per_class[static_cast<std::size_t>(cls)];
        }
    }
    return classes;
}

// Shared binning: `site_values` yields the field to correlate for sample k.
// Accumulates per-sample class means, then averages over samples.
template <typename PerSampleField>
CorrelatorProfile bin_by_distance(int side, std::size_t n_samples, PerSampleField&& field_of) {
    const DistanceClasses classes = build_classes(side);
    const int n = side * side;
    const std::size_t n_classes = classes.distances.size();

    std::vector<double> mean(n_classes, 0.0), m2(n_classes, 0.0);
    std::vector<double> acc(n_classes);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const auto& vals = field_of(k);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int dy = 0; dy < side; ++dy) {
            for (int dx = 0; dx < side; ++dx) {
                const int cls = classes.class_of_displacement[static_cast<std::size_t>(dy) * side + dx];
                double sum = 0.0;
                for (int y = 0; y < side; ++y) {
                    const int yj = y + dy < side ? y + dy : y + dy - side;
                    const auto* row = &vals[static_cast<std::size_t>(y) * side];
                    const auto* row_j = &vals[static_cast<std::size_t>(yj) * side];
                    for (int x = 0; x < side; ++x) {
                        const int xj = x + dx < side ? x + dx : x + dx - side;
                        sum += static_cast<double>(row[x]) * static_cast<double>(row_j[xj]);
                    }
                }
                acc[static_cast<std::size_t>(cls)] += sum;
            }
        }
        // Welford over per-sample class means.
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double sample_mean =
                acc[c] / (static_cast<double>(n) * classes.displacements_per_class[c]);
            const double delta = sample_mean - mean[c];
            mean[c] += delta / static_cast<double>(k + 1);
            m2[c] += delta * (sample_mean - mean[c]);
        }
    }

    CorrelatorProfile profile;
    profile.bins.reserve(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        CorrelatorBin bin;
        bin.distance = classes.distances[c];
        bin.value = mean[c];
        // Ordered displacement sums double-count unordered pairs, except the
        // r = 0 class which pairs each site with itself once.
        const std::int64_t ordered =
            static_cast<std::int64_t>(n) * classes.displacements_per_class[c];
        bin.count = static_cast<std::int64_t>(n_samples) * (c == 0 ? ordered : ordered / 2);
        if (n_samples > 1) {
            const double variance = m2[c] / static_cast<double>(n_samples - 1);
            bin.std_err = std::sqrt(std::max(variance, 0.0) / static_cast<double>(n_samples));
        }
        profile.bins.push_back(bin);
    }
    return profile;
}

void require_matching_sides(const SampleSet& samples) {
    for (const auto& grid : samples.grids) {
        if (grid.side() != samples.geometry.side()) {
            throw std::invalid_argument("sample grid does not match the set geometry");
        }
    }
}

}  // namespace

double magnetization(const SpinGrid& grid) {
    long sum = 0;
    for (const auto s : grid.values()) sum += s;
    return static_cast<double>(sum) / grid.site_count();
}

CorrelatorProfile spin_correlator(const SampleSet& samples, bool connected) {
    if (samples.grids.size() < 2) throw std::invalid_argument("need at least 2 samples");
    require_matching_sides(samples);
    const int side = samples.geometry.side();
    CorrelatorProfile profile = bin_by_distance(
        side, samples.grids.size(),
        [&](std::size_t k) -> std::span<const std::int8_t> { return samples.grids[k].values(); });
    if (connected) {
        double mean_spin = 0.0;
        for (const auto& grid : samples.grids) mean_spin += magnetization(grid);
        mean_spin /= static_cast<double>(samples.grids.size());
        for (auto& bin : profile.bins) bin.value -= mean_spin * mean_spin;
    }
    return profile;
}

EnergyDensityField energy_density(const SampleSet& samples, const CouplingKernel& kernel) {
    if (samples.grids.size() < 2) throw std::invalid_argument("need at least 2 samples");
    require_matching_sides(samples);
    const int side = samples.geometry.side();
    const int n = side * side;

    EnergyDensityField field;
    field.side = side;
    field.n_samples = samples.grids.size();
    field.values.reserve(field.n_samples);
    field.mean_field.assign(static_cast<std::size_t>(n), 0.0);
    for (const auto& grid : samples.grids) {
        std::vector<double> eps = all_local_fields(grid, kernel);
        for (int i = 0; i < n; ++i) {
            eps[static_cast<std::size_t>(i)] *= grid.spin(i);
            field.mean_field[static_cast<std::size_t>(i)] += eps[static_cast<std::size_t>(i)];
        }
        field.values.push_back(std::move(eps));
    }
    for (auto& m : field.mean_field) m /= static_cast<double>(field.n_samples);
    return field;
}

CorrelatorProfile energy_correlator(const SampleSet& samples, const CouplingKernel& kernel) {
    const EnergyDensityField field = energy_density(samples, kernel);
    const int n = field.side * field.side;
    std::vector<double> centered(static_cast<std::size_t>(n));
    return bin_by_distance(field.side, field.n_samples,
                           [&](std::size_t k) -> const std::vector<double>& {
                               for (int i = 0; i < n; ++i) {
                                   centered[static_cast<std::size_t>(i)] =
                                       field.values[k][static_cast<std::size_t>(i)] -
                                       field.mean_field[static_cast<std::size_t>(i)];
                               }
                               return centered;
                           });
}

PowerLawFit fit_power_law(const CorrelatorProfile& profile, double r_min, double r_max) {
    if (!(r_min > 0.0) || !(r_max >= r_min)) {
        throw std::invalid_argument("fit window must satisfy 0 < r_min <= r_max");
    }
    std::vector<double> xs, ys;
    for (const auto& bin : profile.bins) {
        if (bin.distance <= 0.0 || bin.distance < r_min || bin.distance > r_max) continue;
        if (!(bin.value > 0.0)) continue;
        xs.push_back(std::log(bin.distance));
        ys.push_back(std::log(bin.value));
    }
    const std::size_t n = xs.size();
    if (n < 3) {
        throw std::runtime_error("fewer than 3 positive correlator bins in the fit window");
    }

    double x_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x_mean += xs[i];
        y_mean += ys[i];
    }
    x_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
        sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
    }
    const double slope = sxy / sxx;
    const double intercept = y_mean - slope * x_mean;

    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ss_res += r * r;
    }

    PowerLawFit fit;
    fit.delta = -slope / 2.0;
    fit.amplitude = std::exp(intercept);
    fit.residual = std::sqrt(ss_res / static_cast<double>(n));
    const double sigma2 = ss_res / static_cast<double>(n - 2);
    fit.delta_std_err = std::sqrt(sigma2 / sxx) / 2.0;
    fit.r_min = r_min;
    fit.r_max = r_max;
    fit.n_bins_used = static_cast<int>(n);
    return fit;
}

double find_tc(std::vector<std::pair<double, double>> curve) {
    std::erase_if(curve, [](const auto& p) {
        return !std::isfinite(p.first) || !std::isfinite(p.second);
    });
    std::sort(curve.begin(), curve.end());
    if (curve.empty()) throw std::runtime_error("delta_eps curve is empty");

    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
        const double lo = curve[k].second - 1.0;
        const double hi = curve[k + 1].second - 1.0;
        if (lo == 0.0) return curve[k].first;
        if (lo * hi < 0.0) {
            const double t = -lo / (hi - lo);
            return curve[k].first + t * (curve[k + 1].first - curve[k].first);
        }
    }
    if (curve.back().second == 1.0) return curve.back().first;
    throw std::runtime_error("delta_eps never crosses 1 on the given grid");
}

}  // namespace lrising
