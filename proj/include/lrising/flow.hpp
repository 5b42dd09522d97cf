#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "lrising/mcmc.hpp"
#include "lrising/observables.hpp"
#include "lrising/rbm.hpp"
#include "lrising/rng.hpp"
#include "lrising/thermometer.hpp"

namespace lrising {

/// One step of an RBM flow: the visible ensemble plus, once measured, the
/// scaling-dimension fits and the thermometer reading. Fits that hit the
/// correlator noise floor stay empty rather than failing the whole flow.
struct FlowStep {
    int index = 0;  // 1-based; step 1 is the seed ensemble
    SampleSet visible;
    std::optional<PowerLawFit> spin_fit;
    std::optional<PowerLawFit> energy_fit;
    std::vector<double> temperature_probs;
    double mean_temperature = std::numeric_limits<double>::quiet_NaN();
};

struct FlowTrace {
    std::vector<FlowStep> steps;
};

struct FitWindow {
    double r_min = 1.0;
    double r_max = 0.0;  // <= 0 means L / 2
};

/// Alternately samples h from v and v from h under the trained parameters,
/// retaining every visible ensemble. Step 1 is the seed set itself.
FlowTrace rbm_flow(const SampleSet& seed_set, const RbmParams& p, int length, Rng& rng);

/// Fills in Delta_s, Delta_eps and the thermometer reading for every step.
void measure_flow(FlowTrace& trace, const CouplingKernel& kernel, const ThermometerModel& model,
                  FitWindow window = {});

}  // namespace lrising
