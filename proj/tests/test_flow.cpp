#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrising/flow.hpp"

using namespace lrising;

namespace {

SampleSet coin_set(int side, int n, std::uint64_t seed, double temperature = 1.0) {
    Rng rng(seed);
    SampleSet set{LatticeGeometry(side, 3.0), temperature, {}};
    for (int k = 0; k < n; ++k) set.grids.push_back(SpinGrid::random(side, rng));
    return set;
}

ThermometerModel tiny_thermometer(int input_dim) {
    ThermometerModel model;
    model.input_dim = input_dim;
    model.hidden_width = 2;
    model.class_temperatures = {0.0, 14.0};
    model.w1.assign(static_cast<std::size_t>(2 * input_dim), 0.01);
    model.b1.assign(2, 0.0);
    model.w2 = {0.1, -0.1, -0.1, 0.1};
    model.b2.assign(2, 0.0);
    return model;
}

}  // namespace

TEST_CASE("a length-1 flow is exactly the seed ensemble") {
    const SampleSet seed = coin_set(4, 6, 3);
    Rng rng(5);
    const RbmParams p = RbmParams::zeros(16, 4);
    const FlowTrace trace = rbm_flow(seed, p, 1, rng);
    REQUIRE(trace.steps.size() == 1);
    CHECK(trace.steps[0].index == 1);
    REQUIRE(trace.steps[0].visible.grids.size() == 6);
    for (std::size_t k = 0; k < 6; ++k) CHECK(trace.steps[0].visible.grids[k] == seed.grids[k]);
}

TEST_CASE("a zero-parameter RBM decorrelates the ensemble after one step") {
    const SampleSet seed{LatticeGeometry(6, 3.0), 0.0,
                         std::vector<SpinGrid>(300, SpinGrid(6, +1))};
    Rng rng(7);
    const RbmParams p = RbmParams::zeros(36, 9);
    const FlowTrace trace = rbm_flow(seed, p, 3, rng);
    REQUIRE(trace.steps.size() == 3);

    for (int step = 1; step < 3; ++step) {
        double mean_m = 0.0;
        for (const auto& grid : trace.steps[step].visible.grids) mean_m += magnetization(grid);
        mean_m /= 300.0;
        // i.i.d. fair coins: sigma of the mean magnetization is 1/sqrt(N*n).
        CHECK(std::abs(mean_m) < 4.0 / std::sqrt(36.0 * 300.0));

        const CorrelatorProfile profile = spin_correlator(trace.steps[step].visible);
        for (const auto& bin : profile.bins) {
            if (bin.distance == 0.0) continue;
            CHECK(std::abs(bin.value) < 4.0 * bin.std_err + 1e-12);
        }
    }
}

TEST_CASE("flow shape contract: every step keeps the seed cardinality and side") {
    const SampleSet seed = coin_set(10, 20, 11, 7.7);
    Rng prng(13);
    RbmParams p = RbmParams::gaussian(100, 81, 0.05, prng);
    Rng rng(17);
    const FlowTrace trace = rbm_flow(seed, p, 30, rng);
    REQUIRE(trace.steps.size() == 30);
    for (const auto& step : trace.steps) {
        CHECK(step.visible.grids.size() == 20);
        CHECK(step.visible.geometry.side() == 10);
        CHECK(step.visible.temperature == 7.7);
    }
    CHECK(trace.steps.front().index == 1);
    CHECK(trace.steps.back().index == 30);
}

TEST_CASE("flows are deterministic given the seed") {
    const SampleSet seed = coin_set(5, 10, 19);
    Rng prng(23);
    const RbmParams p = RbmParams::gaussian(25, 9, 0.2, prng);
    Rng rng_a(29), rng_b(29), rng_c(31);
    const FlowTrace a = rbm_flow(seed, p, 8, rng_a);
    const FlowTrace b = rbm_flow(seed, p, 8, rng_b);
    const FlowTrace c = rbm_flow(seed, p, 8, rng_c);
    bool differs = false;
    for (std::size_t s = 0; s < 8; ++s) {
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(a.steps[s].visible.grids[k] == b.steps[s].visible.grids[k]);
            if (!(a.steps[s].visible.grids[k] == c.steps[s].visible.grids[k])) differs = true;
        }
    }
    CHECK(differs);
}

TEST_CASE("dimension mismatches are rejected") {
    const SampleSet seed = coin_set(4, 3, 37);
    const RbmParams p = RbmParams::zeros(9, 4);
    Rng rng(41);
    CHECK_THROWS_AS(rbm_flow(seed, p, 5, rng), std::invalid_argument);
}

TEST_CASE("measure_flow records noise-floor fits as missing, not fatal") {
    // Saturated visible biases pin every step-2+ grid to vertical stripes.
    // The striped spin correlator is exactly (-1)^dx, leaving only two
    // positive bins inside [1, L/2]; the Delta_s fit must fail and be
    // recorded as missing while the rest of the measurement proceeds.
    const SampleSet seed = coin_set(6, 40, 43);
    RbmParams p = RbmParams::zeros(36, 9);
    for (int i = 0; i < 36; ++i) p.visible_bias[i] = (i % 6) % 2 == 0 ? 50.0 : -50.0;

    Rng rng(47);
    FlowTrace trace = rbm_flow(seed, p, 4, rng);
    const LatticeGeometry geom(6, 3.0, 0.0);
    measure_flow(trace, build_kernel(geom), tiny_thermometer(36));

    for (std::size_t s = 1; s < trace.steps.size(); ++s) {
        const FlowStep& step = trace.steps[s];
        for (const auto& grid : step.visible.grids) CHECK(magnetization(grid) == 0.0);
        CHECK_FALSE(step.spin_fit.has_value());
        CHECK(step.temperature_probs.size() == 2);
        const double total = step.temperature_probs[0] + step.temperature_probs[1];
        CHECK(std::abs(total - 1.0) < 1e-9);
        CHECK(std::isfinite(step.mean_temperature));
    }
}
