#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrising/geometry.hpp"

using namespace lrising;

namespace {

// Independent J evaluation: minimum-image distance computed from scratch.
double reference_coupling(int dx, int dy, int side, double alpha) {
    const int mx = std::min(((dx % side) + side) % side, side - ((dx % side) + side) % side);
    const int my = std::min(((dy % side) + side) % side, side - ((dy % side) + side) % side);
    if (mx == 0 && my == 0) return 0.0;
    return std::pow(std::sqrt(double(mx * mx + my * my)), -alpha);
}

// Direct pair-sum evaluation of the Hamiltonian, O(N^2).
double reference_energy(const SpinGrid& grid, const LatticeGeometry& geom) {
    const int side = geom.side();
    double h = 0.0;
    for (int i = 0; i < grid.site_count(); ++i) {
        for (int j = i + 1; j < grid.site_count(); ++j) {
            const int dx = (j % side) - (i % side);
            const int dy = (j / side) - (i / side);
            h -= reference_coupling(dx, dy, side, geom.alpha()) * grid.spin(i) * grid.spin(j);
        }
        h -= geom.mu() * grid.spin(i);
    }
    return h;
}

}  // namespace

TEST_CASE("geometry construction rejects invalid parameters") {
    CHECK_THROWS_AS(LatticeGeometry(1, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(LatticeGeometry(10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(LatticeGeometry(10, -2.0), std::invalid_argument);
    CHECK_NOTHROW(LatticeGeometry(2, 3.0));
}

TEST_CASE("spin grid enforces +-1 entries") {
    SpinGrid grid(3);
    CHECK_THROWS_AS(grid.set_spin(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(grid.set_spin(0, 2), std::invalid_argument);
    grid.set_spin(4, -1);
    CHECK(grid.spin(4) == -1);
    grid.flip(4);
    CHECK(grid.spin(4) == +1);
}

TEST_CASE("kernel values on the 10x10 alpha=3 lattice") {
    const LatticeGeometry geom(10, 3.0);
    const CouplingKernel kernel = build_kernel(geom);
    CHECK(kernel.at(1, 0) == doctest::Approx(1.0));
    CHECK(kernel.at(2, 0) == doctest::Approx(0.125));
    CHECK(kernel.at(9, 0) == doctest::Approx(1.0));  // minimum image wraps
    CHECK(kernel.at(0, 0) == 0.0);
    CHECK(kernel.at(5, 5) == doctest::Approx(std::pow(std::sqrt(50.0), -3.0)));
}

TEST_CASE("kernel symmetry and positivity") {
    for (const int side : {4, 7, 10}) {
        const LatticeGeometry geom(side, 3.0);
        const CouplingKernel kernel = build_kernel(geom);
        for (int dy = 0; dy < side; ++dy) {
            for (int dx = 0; dx < side; ++dx) {
                const double j = kernel.at(dx, dy);
                CHECK(std::isfinite(j));
                CHECK(j >= 0.0);
                CHECK(j == kernel.at((side - dx) % side, (side - dy) % side));
                CHECK(j == doctest::Approx(reference_coupling(dx, dy, side, 3.0)));
            }
        }
    }
}

TEST_CASE("total energy of the all-up 2x2 lattice matches the hand enumeration") {
    const LatticeGeometry geom(2, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    const SpinGrid grid(2, +1);
    // Six unordered pairs: four at distance 1, two on the diagonal.
    const double expected = -(4.0 * 1.0 + 2.0 * std::pow(std::sqrt(2.0), -3.0));
    CHECK(total_energy(grid, kernel, geom) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(total_energy(grid, kernel, geom) == doctest::Approx(reference_energy(grid, geom)));
}

TEST_CASE("total energy equals the direct pair sum on random grids") {
    Rng rng(7);
    for (const double mu : {0.0, 0.3}) {
        const LatticeGeometry geom(5, 3.0, mu);
        const CouplingKernel kernel = build_kernel(geom);
        for (int trial = 0; trial < 10; ++trial) {
            const SpinGrid grid = SpinGrid::random(5, rng);
            CHECK(total_energy(grid, kernel, geom) ==
                  doctest::Approx(reference_energy(grid, geom)).epsilon(1e-12));
        }
    }
}

TEST_CASE("global spin flip preserves energy at mu = 0") {
    const LatticeGeometry geom(6, 3.0, 0.0);
    const CouplingKernel kernel = build_kernel(geom);
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const SpinGrid grid = SpinGrid::random(6, rng);
        CHECK(total_energy(grid, kernel, geom) ==
              doctest::Approx(total_energy(grid.flipped(), kernel, geom)));
    }
}

TEST_CASE("single-site flip changes the energy by flip_delta") {
    const LatticeGeometry geom(4, 3.0, 0.25);
    const CouplingKernel kernel = build_kernel(geom);
    Rng rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        SpinGrid grid = SpinGrid::random(4, rng);
        for (int site = 0; site < grid.site_count(); ++site) {
            const double before = total_energy(grid, kernel, geom);
            const double field = local_field(grid, site, kernel);
            const double predicted = flip_delta(grid, site, field, geom.mu());
            grid.flip(site);
            CHECK(total_energy(grid, kernel, geom) - before ==
                  doctest::Approx(predicted).epsilon(1e-10));
            grid.flip(site);
        }
    }
}

TEST_CASE("local field is uniform on a uniform grid") {
    const LatticeGeometry geom(8, 3.0);
    const CouplingKernel kernel = build_kernel(geom);
    const SpinGrid grid(8, +1);
    for (int site = 0; site < grid.site_count(); ++site) {
        CHECK(local_field(grid, site, kernel) == doctest::Approx(kernel.uniform_field()));
    }
}

TEST_CASE("local field matches the brute-force sum on a random 3x3 grid") {
    const LatticeGeometry geom(3, 3.0);
    const CouplingKernel kernel = build_kernel(geom);
    Rng rng(17);
    const SpinGrid grid = SpinGrid::random(3, rng);
    for (int i = 0; i < 9; ++i) {
        double expected = 0.0;
        for (int j = 0; j < 9; ++j) {
            if (j == i) continue;
            const int dx = (j % 3) - (i % 3);
            const int dy = (j / 3) - (i / 3);
            expected += reference_coupling(dx, dy, 3, 3.0) * grid.spin(j);
        }
        CHECK(local_field(grid, i, kernel) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("all_local_fields agrees with per-site local_field") {
    const LatticeGeometry geom(6, 3.0);
    const CouplingKernel kernel = build_kernel(geom);
    Rng rng(19);
    const SpinGrid grid = SpinGrid::random(6, rng);
    const std::vector<double> fields = all_local_fields(grid, kernel);
    for (int site = 0; site < grid.site_count(); ++site) {
        CHECK(fields[site] == doctest::Approx(local_field(grid, site, kernel)).epsilon(1e-12));
    }
}

TEST_CASE("out-of-range sites and mismatched dimensions are rejected") {
    const LatticeGeometry geom(4, 3.0);
    const CouplingKernel kernel = build_kernel(geom);
    const SpinGrid grid(4);
    CHECK_THROWS_AS(local_field(grid, -1, kernel), std::out_of_range);
    CHECK_THROWS_AS(local_field(grid, 16, kernel), std::out_of_range);
    CHECK_THROWS_AS(local_field(grid, 4, 0, kernel), std::out_of_range);
    const SpinGrid wrong(5);
    CHECK_THROWS_AS(total_energy(wrong, kernel, geom), std::invalid_argument);
}
