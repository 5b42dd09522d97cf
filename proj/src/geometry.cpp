#include "lrising/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lrising {

LatticeGeometry::LatticeGeometry(int side, double alpha, double mu)
    : side_(side), alpha_(alpha), mu_(mu) {
    if (side < 2) {
        throw std::invalid_argument("lattice side must be >= 2, got " + std::to_string(side));
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("coupling exponent alpha must be positive and finite");
    }
    if (!std::isfinite(mu)) {
        throw std::invalid_argument("external field mu must be finite");
    }
}

SpinGrid::SpinGrid(int side, std::int8_t fill)
    : side_(side), spins_(static_cast<std::size_t>(side) * side, fill) {
    if (side < 1) throw std::invalid_argument("grid side must be >= 1");
    if (fill != 1 && fill != -1) throw std::invalid_argument("spins must be -1 or +1");
}

SpinGrid SpinGrid::random(int side, Rng& rng) {
    SpinGrid grid(side);
    for (auto& s : grid.spins_) s = static_cast<std::int8_t>(rng.coin());
    return grid;
}

void SpinGrid::set_spin(int site, std::int8_t value) {
    if (value != 1 && value != -1) throw std::invalid_argument("spins must be -1 or +1");
    spins_[static_cast<std::size_t>(site)] = value;
}

SpinGrid SpinGrid::flipped() const {
    SpinGrid out = *this;
    for (auto& s : out.spins_) s = static_cast<std::int8_t>(-s);
    return out;
}

double min_image_distance(int dx, int dy, int side) {
    const int mx = std::min(dx, side - dx);
    const int my = std::min(dy, side - dy);
    return std::sqrt(static_cast<double>(mx) * mx + static_cast<double>(my) * my);
}

CouplingKernel build_kernel(const LatticeGeometry& geom) {
    const int side = geom.side();
    CouplingKernel kernel;
    kernel.side_ = side;
    kernel.alpha_ = geom.alpha();
    kernel.table_.assign(static_cast<std::size_t>(side) * side, 0.0);
    for (int dy = 0; dy < side; ++dy) {
        for (int dx = 0; dx < side; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const double r = min_image_distance(dx, dy, side);
            const double j = std::pow(r, -geom.alpha());
            kernel.table_[static_cast<std::size_t>(dy) * side + dx] = j;
            kernel.total_ += j;
        }
    }
    return kernel;
}

double CouplingKernel::between(int site_a, int site_b) const {
    const int xa = site_a % side_, ya = site_a / side_;
    const int xb = site_b % side_, yb = site_b / side_;
    const int dx = ((xb - xa) % side_ + side_) % side_;
    const int dy = ((yb - ya) % side_ + side_) % side_;
    return at(dx, dy);
}

double total_energy(const SpinGrid& grid, const CouplingKernel& kernel,
                    const LatticeGeometry& geom) {
    if (grid.side() != geom.side() || kernel.side() != geom.side()) {
        throw std::invalid_argument("grid/kernel/geometry dimensions disagree");
    }
    const std::vector<double> fields = all_local_fields(grid, kernel);
    double pair_sum = 0.0;
    double spin_sum = 0.0;
    for (int i = 0; i < grid.site_count(); ++i) {
        pair_sum += grid.spin(i) * fields[static_cast<std::size_t>(i)];
        spin_sum += grid.spin(i);
    }
    return -0.5 * pair_sum - geom.mu() * spin_sum;
}

double local_field(const SpinGrid& grid, int site, const CouplingKernel& kernel) {
    const int side = grid.side();
    if (site < 0 || site >= grid.site_count()) {
        throw std::out_of_range("site index out of range");
    }
    const int x = site % side, y = site / side;
    double field = 0.0;
    for (int dy = 0; dy < side; ++dy) {
        const int yj = y + dy < side ? y + dy : y + dy - side;
        const double* jrow = kernel.table().data() + static_cast<std::size_t>(dy) * side;
        const std::int8_t* srow = grid.values().data() + static_cast<std::size_t>(yj) * side;
        for (int dx = 0; dx < side; ++dx) {
            const int xj = x + dx < side ? x + dx : x + dx - side;
            field += jrow[dx] * srow[xj];
        }
    }
    return field;
}

double local_field(const SpinGrid& grid, int x, int y, const CouplingKernel& kernel) {
    if (x < 0 || x >= grid.side() || y < 0 || y >= grid.side()) {
        throw std::out_of_range("site coordinates out of range");
    }
    return local_field(grid, y * grid.side() + x, kernel);
}

std::vector<double> all_local_fields(const SpinGrid& grid, const CouplingKernel& kernel) {
    const int side = grid.side();
    const int n = grid.site_count();
    std::vector<double> fields(static_cast<std::size_t>(n), 0.0);
    // Accumulate by displacement: fields[i] += J(d) * s[i + d] for all d.
    for (int dy = 0; dy < side; ++dy) {
        const double* jrow = kernel.table().data() + static_cast<std::size_t>(dy) * side;
        for (int dx = 0; dx < side; ++dx) {
            const double j = jrow[dx];
            if (j == 0.0) continue;
            for (int y = 0; y < side; ++y) {
                const int yj = y + dy < side ? y + dy : y + dy - side;
                const std::int8_t* srow = grid.values().data() + static_cast<std::size_t>(yj) * side;
                double* frow = fields.data() + static_cast<std::size_t>(y) * side;
                for (int x = 0; x < side; ++x) {
                    const int xj = x + dx < side ? x + dx : x + dx - side;
                    frow[x] += j * srow[xj];
                }
            }
        }
    }
    return fields;
}

}  // namespace lrising
