#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrising/mcmc.hpp"
#include "lrising/observables.hpp"

using namespace lrising;

namespace {

// Standard error of the chain mean via batch means, absorbing
// autocorrelation between retained samples.
double batch_means_stderr(const std::vector<double>& values, std::size_t n_batches) {
    const std::size_t per_batch = values.size() / n_batches;
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
        double batch_mean = 0.0;
        for (std::size_t k = 0; k < per_batch; ++k) batch_mean += values[b * per_batch + k];
        batch_mean /= static_cast<double>(per_batch);
        var += (batch_mean - mean) * (batch_mean - mean);
    }
    var /= static_cast<double>(n_batches - 1);
    return std::sqrt(var / static_cast<double>(n_batches));
}

}  // namespace

TEST_CASE("positive-energy proposals are accepted with probability exp(-dE/T)") {
    // All-up grid with mu tuned so every proposal has dE = 1.
    const int side = 4;
    LatticeGeometry probe(side, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(probe);
    const double mu = 0.5 - kernel.uniform_field();
    const LatticeGeometry geom(side, 3.0, mu);

    McmcConfig cfg;
    cfg.temperature = 1.0;
    Rng rng(101);
    const SpinGrid reference(side, +1);
    const std::vector<double> reference_fields = all_local_fields(reference, kernel);

    const int trials = 200000;
    int accepted = 0;
    for (int t = 0; t < trials; ++t) {
        SpinGrid grid = reference;
        std::vector<double> fields = reference_fields;
        accepted += mcmc_step(grid, fields, kernel, geom, cfg, rng);
    }
    const double p = std::exp(-1.0);
    const double freq = static_cast<double>(accepted) / trials;
    const double sigma = std::sqrt(p * (1.0 - p) / trials);
    CHECK(std::abs(freq - p) < 3.0 * sigma);
}

TEST_CASE("negative-energy proposals are always accepted") {
    // All-up grid with a strong negative field: every flip lowers energy.
    const int side = 4;
    const LatticeGeometry geom(side, 3.0, -100.0);
    const CouplingKernel kernel = build_kernel(geom);
    McmcConfig cfg;
    cfg.temperature = 1.0;
    Rng rng(7);
    for (int t = 0; t < 1000; ++t) {
        SpinGrid grid(side, +1);
        std::vector<double> fields = all_local_fields(grid, kernel);
        CHECK(mcmc_step(grid, fields, kernel, geom, cfg, rng));
    }
}

TEST_CASE("T = 0 is greedy: uphill moves never accepted") {
    const int side = 4;
    const LatticeGeometry geom(side, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    McmcConfig cfg;
    cfg.temperature = 0.0;
    Rng rng(3);
    SpinGrid grid(side, +1);  // ground state at mu = 0; every flip is uphill
    std::vector<double> fields = all_local_fields(grid, kernel);
    for (int t = 0; t < 10000; ++t) {
        CHECK_FALSE(mcmc_step(grid, fields, kernel, geom, cfg, rng));
    }
    CHECK(grid == SpinGrid(side, +1));
}

TEST_CASE("cached fields stay consistent with a full recompute") {
    const LatticeGeometry geom(6, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    McmcConfig cfg;
    cfg.temperature = 3.0;
    Rng rng(23);
    SpinGrid grid = SpinGrid::random(6, rng);
    std::vector<double> fields = all_local_fields(grid, kernel);
    for (int t = 0; t < 100000; ++t) mcmc_step(grid, fields, kernel, geom, cfg, rng);
    const std::vector<double> fresh = all_local_fields(grid, kernel);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        CHECK(std::abs(fields[i] - fresh[i]) < 1e-10);
    }
}

TEST_CASE("identical seeds give bit-identical sample sets") {
    const LatticeGeometry geom(5, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    McmcConfig cfg;
    cfg.temperature = 6.0;
    cfg.burn_in_steps = 1000;
    cfg.stride = 25;
    cfg.seed = 99;
    const SampleSet a = run_chain(geom, kernel, cfg, 50);
    const SampleSet b = run_chain(geom, kernel, cfg, 50);
    REQUIRE(a.grids.size() == 50);
    CHECK(a.temperature == 6.0);
    for (std::size_t k = 0; k < a.grids.size(); ++k) CHECK(a.grids[k] == b.grids[k]);

    cfg.seed = 100;
    const SampleSet c = run_chain(geom, kernel, cfg, 50);
    bool any_difference = false;
    for (std::size_t k = 0; k < a.grids.size(); ++k) {
        if (!(a.grids[k] == c.grids[k])) any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("low-temperature chains order, high-temperature chains do not") {
    const LatticeGeometry geom(10, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    McmcConfig cfg;
    cfg.burn_in_steps = 50000;
    cfg.stride = 100;
    cfg.seed = 5;

    cfg.temperature = 0.5;
    const SampleSet cold = run_chain(geom, kernel, cfg, 2000);
    double cold_abs_m = 0.0;
    for (const auto& grid : cold.grids) cold_abs_m += std::abs(magnetization(grid));
    cold_abs_m /= static_cast<double>(cold.grids.size());
    CHECK(cold_abs_m > 0.95);

    cfg.temperature = 14.0;
    const SampleSet hot = run_chain(geom, kernel, cfg, 2000);
    double hot_abs_m = 0.0;
    for (const auto& grid : hot.grids) hot_abs_m += std::abs(magnetization(grid));
    hot_abs_m /= static_cast<double>(hot.grids.size());
    CHECK(hot_abs_m < 0.2);
}

TEST_CASE("3x3 chain averages match exact enumeration within 3 sigma") {
    const LatticeGeometry geom(3, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    const ExactObservables exact = exact_enumeration(geom, kernel, 5.0);

    McmcConfig cfg;
    cfg.temperature = 5.0;
    cfg.burn_in_steps = 9 * 500;
    cfg.stride = 45;
    cfg.seed = 31;
    const std::size_t n_samples = 10000;
    const SampleSet samples = run_chain(geom, kernel, cfg, n_samples);

    for (int i = 0; i < 9; ++i) {
        for (int j = i + 1; j < 9; ++j) {
            std::vector<double> products(n_samples);
            for (std::size_t k = 0; k < n_samples; ++k) {
                products[k] = samples.grids[k].spin(i) * samples.grids[k].spin(j);
            }
            double mean = 0.0;
            for (const double v : products) mean += v;
            mean /= static_cast<double>(n_samples);
            const double se = batch_means_stderr(products, 100);
            CHECK(std::abs(mean - exact.pair_correlation[i * 9 + j]) < 3.0 * se + 1e-12);
        }
    }
}

TEST_CASE("exact enumeration limits") {
    const LatticeGeometry geom(3, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    CHECK_THROWS_AS(exact_enumeration(geom, kernel, 0.0), std::invalid_argument);
    const LatticeGeometry big(5, 3.0, 0.0);
    CHECK_THROWS_AS(exact_enumeration(big, build_kernel(big), 5.0), std::invalid_argument);
}

TEST_CASE("exact enumeration decorrelates at infinite temperature") {
    const LatticeGeometry geom(2, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    const ExactObservables hot = exact_enumeration(geom, kernel, 1e6);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            CHECK(std::abs(hot.pair_correlation[i * 4 + j]) < 1e-4);
        }
    }
    CHECK(std::abs(hot.mean_magnetization) < 1e-9);
}

TEST_CASE("exact enumeration aligns in the zero-temperature limit") {
    const LatticeGeometry geom(2, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    const ExactObservables cold = exact_enumeration(geom, kernel, 0.01);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            CHECK(cold.pair_correlation[i * 4 + j] == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK(cold.mean_abs_magnetization == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("frozen 3x3 reference values at T = 5") {
    // Regression anchors from this enumeration. Sites 0 and 1 sit at
    // distance 1; sites 0 and 4 (and 0 and 8) at sqrt(2) by minimum image.
    const LatticeGeometry geom(3, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    const ExactObservables exact = exact_enumeration(geom, kernel, 5.0);
    CHECK(exact.pair_correlation[0 * 9 + 1] == doctest::Approx(0.432096155740361).epsilon(1e-12));
    CHECK(exact.pair_correlation[0 * 9 + 4] == doctest::Approx(0.377550731380653).epsilon(1e-12));
    CHECK(exact.pair_correlation[0 * 9 + 8] == doctest::Approx(0.377550731380653).epsilon(1e-12));
    CHECK(std::abs(exact.mean_magnetization) < 1e-12);
    CHECK(exact.mean_abs_magnetization == doctest::Approx(0.614580311829868).epsilon(1e-12));
    CHECK(exact.mean_energy == doctest::Approx(-10.1804489449373).epsilon(1e-12));
}
