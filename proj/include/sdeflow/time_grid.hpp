#pragma once

#include <cstdint>
#include <stdexcept>

namespace sdeflow {

struct TimeGrid {
    double t_start = 0.0;
    double dt = 0.0;
    std::int64_t n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double start, double step, std::int64_t n) : t_start(start), dt(step), n_steps(n) {
        if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
        if (n_steps < 0) throw std::invalid_argument("TimeGrid: n_steps must be >= 0");
    }

    // Grid point k, always evaluated as t_start + k*dt (single fixed expression,
    // no running accumulation) so times are reproducible.
    double time(std::int64_t k) const { return t_start + static_cast<double>(k) * dt; }
    double t_end() const { return time(n_steps); }
};

} // namespace sdeflow
