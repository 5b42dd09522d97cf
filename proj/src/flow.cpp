#include "lrising/flow.hpp"

#include <stdexcept>

namespace lrising {

FlowTrace rbm_flow(const SampleSet& seed_set, const RbmParams& p, int length, Rng& rng) {
    if (length < 1) throw std::invalid_argument("flow length must be >= 1");
    if (seed_set.grids.empty()) throw std::invalid_argument("seed set is empty");
    const int side = seed_set.geometry.side();
    if (p.n_visible != side * side) {
        throw std::invalid_argument("RBM visible dimension does not match the seed grids");
    }

    FlowTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(length));
    trace.steps.push_back(FlowStep{1, seed_set, {}, {}, {}, {}});

    NodeState visible(static_cast<std::size_t>(p.n_visible));
    for (int step = 2; step <= length; ++step) {
        const SampleSet& prev = trace.steps.back().visible;
        SampleSet next{prev.geometry, prev.temperature, {}};
        next.grids.reserve(prev.grids.size());
        for (const auto& grid : prev.grids) {
            std::copy(grid.values().begin(), grid.values().end(), visible.begin());
            const ConditionalSample hidden = hidden_given_visible(visible, p, rng);
            const ConditionalSample regenerated = visible_given_hidden(hidden.state, p, rng);
            SpinGrid out(side);
            for (int i = 0; i < p.n_visible; ++i) {
                out.set_spin(i, regenerated.state[static_cast<std::size_t>(i)]);
            }
            next.grids.push_back(std::move(out));
        }
        trace.steps.push_back(FlowStep{step, std::move(next), {}, {}, {}, {}});
    }
    return trace;
}

void measure_flow(FlowTrace& trace, const CouplingKernel& kernel, const ThermometerModel& model,
                  FitWindow window) {
    for (auto& step : trace.steps) {
        const double r_max =
            window.r_max > 0.0 ? window.r_max : step.visible.geometry.side() / 2.0;
        try {
            step.spin_fit = fit_power_law(spin_correlator(step.visible), window.r_min, r_max);
        } catch (const std::runtime_error&) {
            step.spin_fit.reset();  // noise floor; recorded as missing
        }
        try {
            step.energy_fit =
                fit_power_law(energy_correlator(step.visible, kernel), window.r_min, r_max);
        } catch (const std::runtime_error&) {
            step.energy_fit.reset();
        }
        const TemperatureMeasurement reading = measure(model, step.visible);
        step.temperature_probs = reading.probabilities;
        step.mean_temperature = reading.mean_temperature;
    }
}

}  // namespace lrising
