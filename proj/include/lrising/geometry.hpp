#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrising/rng.hpp"

namespace lrising {

/// Periodic L x L lattice with power-law couplings J(r) = r^(-alpha) and an
/// external field mu. Immutable after construction; invalid parameters are
/// rejected here so downstream code never revalidates.
class LatticeGeometry {
public:
    LatticeGeometry(int side, double alpha, double mu = 0.0);

    int side() const { return side_; }
    int site_count() const { return side_ * side_; }
    double alpha() const { return alpha_; }
    double mu() const { return mu_; }

private:
    int side_;
    double alpha_;
    double mu_;
};

/// L x L array of spins in {-1, +1}. Site index is y * L + x (row-major).
class SpinGrid {
public:
    SpinGrid() = default;
    explicit SpinGrid(int side, std::int8_t fill = +1);

    /// Uniform random +-1 per site.
    static SpinGrid random(int side, Rng& rng);

    int side() const { return side_; }
    int site_count() const { return side_ * side_; }

    std::int8_t spin(int site) const { return spins_[static_cast<std::size_t>(site)]; }
    std::int8_t spin(int x, int y) const { return spins_[static_cast<std::size_t>(y) * side_ + x]; }

    void set_spin(int site, std::int8_t value);
    void flip(int site) { spins_[static_cast<std::size_t>(site)] = static_cast<std::int8_t>(-spins_[static_cast<std::size_t>(site)]); }

    /// Global spin flip (every site negated).
    SpinGrid flipped() const;

    std::span<const std::int8_t> values() const { return spins_; }

    bool operator==(const SpinGrid&) const = default;

private:
    int side_ = 0;
    std::vector<std::int8_t> spins_;
};

/// Precomputed J table over torus displacements (dx, dy), dx,dy in [0, L).
/// J(0,0) = 0; otherwise J = r_min^(-alpha) with r_min the minimum-image
/// Euclidean distance. Shareable read-only across workers.
class CouplingKernel {
public:
    CouplingKernel() = default;

    int side() const { return side_; }
    double alpha() const { return alpha_; }

    /// J for displacement (dx, dy); both coordinates must lie in [0, L).
    double at(int dx, int dy) const { return table_[static_cast<std::size_t>(dy) * side_ + dx]; }

    /// J between two site indices.
    double between(int site_a, int site_b) const;

    /// Sum of J over all displacements: the local field on an all-up grid.
    double uniform_field() const { return total_; }

    std::span<const double> table() const { return table_; }

private:
    friend CouplingKernel build_kernel(const LatticeGeometry& geom);
    int side_ = 0;
    double alpha_ = 0.0;
    std::vector<double> table_;
    double total_ = 0.0;
};

/// Minimum-image Euclidean distance for displacement (dx, dy) on an L-torus.
double min_image_distance(int dx, int dy, int side);

CouplingKernel build_kernel(const LatticeGeometry& geom);

/// H = -sum_{pairs} J_ij s_i s_j - mu sum_j s_j, each unordered pair once.
double total_energy(const SpinGrid& grid, const CouplingKernel& kernel,
                    const LatticeGeometry& geom);

/// sum_{j != i} J_ij s_j at the given site.
double local_field(const SpinGrid& grid, int site, const CouplingKernel& kernel);
double local_field(const SpinGrid& grid, int x, int y, const CouplingKernel& kernel);

/// Local field at every site; O(N^2).
std::vector<double> all_local_fields(const SpinGrid& grid, const CouplingKernel& kernel);

/// Energy change if `site` were flipped: 2 * s_i * (field_i + mu).
inline double flip_delta(const SpinGrid& grid, int site, double field_at_site, double mu) {
    return 2.0 * grid.spin(site) * (field_at_site + mu);
}

}  // namespace lrising
