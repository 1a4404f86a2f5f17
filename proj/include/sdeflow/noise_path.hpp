#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "sdeflow/rng.hpp"
#include "sdeflow/time_grid.hpp"

namespace sdeflow {

// Dyadic quantum used to snap Brownian increments. Increments are rounded to
// the grid 2^(ceil(log2 sqrt(dt)) - 30), a relative resolution of ~1e-9. The
// snap keeps increments statistically indistinguishable from Gaussians at
// Monte Carlo scale while making additions of shared increments exact in IEEE
// arithmetic for states on the same dyadic lattice; pure additive noise then
// moves all ensemble members by bit-identical displacements and inter-member
// differences are conserved exactly.
inline double noise_quantum(double dt) {
    int e = 0;
    std::frexp(std::sqrt(dt), &e); // sqrt(dt) = m * 2^e with m in [0.5, 1)
    return std::ldexp(1.0, e - 30);
}

// Brownian increment record on a time grid, reproducible from (seed, absolute
// step index, component). step_offset anchors local step 0 at an absolute
// index, which makes sub-paths and time shifts (the discrete noise shift
// theta_s) share increments with the parent path by construction.
struct NoisePath {
    std::uint64_t seed = 0;
    int dim = 0;
    TimeGrid grid;
    std::int64_t step_offset = 0;

    NoisePath() = default;
    NoisePath(std::uint64_t s, int d, TimeGrid g, std::int64_t offset = 0)
        : seed(s), dim(d), grid(g), step_offset(offset) {
        if (dim <= 0) throw std::invalid_argument("NoisePath: dim must be positive");
    }

    // Increment of component c over [t_k, t_{k+1}] for local step k.
    double increment(std::int64_t k, int c) const {
        const std::uint64_t ctr =
            static_cast<std::uint64_t>(step_offset + k) * static_cast<std::uint64_t>(dim) +
            static_cast<std::uint64_t>(c);
        const double w = standard_normal(seed, ctr) * std::sqrt(grid.dt);
        const double q = noise_quantum(grid.dt);
        return std::nearbyint(w / q) * q;
    }

    void increment(std::int64_t k, double* out) const {
        for (int c = 0; c < dim; ++c) out[c] = increment(k, c);
    }

    // Discrete theta_s: same path, increments shifted by a whole number of steps.
    NoisePath shifted(std::int64_t steps) const {
        return NoisePath(seed, dim, grid, step_offset + steps);
    }

    // Restriction to steps [first, first + n): identical increments to the
    // parent on the overlap.
    NoisePath subpath(std::int64_t first, std::int64_t n) const {
        if (first < 0 || n < 0 || first + n > grid.n_steps)
            throw std::out_of_range("NoisePath::subpath: range outside parent grid");
        TimeGrid g(grid.time(first), grid.dt, n);
        return NoisePath(seed, dim, g, step_offset + first);
    }
};

} // namespace sdeflow
