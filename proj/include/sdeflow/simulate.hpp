#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdeflow/model.hpp"
#include "sdeflow/noise_path.hpp"
#include "sdeflow/time_grid.hpp"

namespace sdeflow {

// Drift stabilization for singular/unbounded coefficients. norm_clip replaces
// b by b * min(1, cap/|b|) with cap = cap_scale * dt^{-1/2}, which preserves
// the drift direction; soft uses b / (1 + dt |b|). On models with |b| <= cap
// norm_clip multiplies by exactly 1.0, so tamed and untamed runs agree
// bit-for-bit.
struct TamingSpec {
    enum class Kind { none, norm_clip, soft };
    Kind kind = Kind::norm_clip;
    double cap_scale = 1.0;

    static TamingSpec none() { return {Kind::none, 1.0}; }
    std::string name() const;
};

// Execution policy for the data-parallel member loop. `serial` is the
// reference implementation kept for testing; `openmp` must produce
// bit-identical results at any thread count.
struct ExecPolicy {
    int threads = -1; // -1: OpenMP default, 0 or 1: serial reference loop
    bool serial() const { return threads == 0 || threads == 1; }
};

struct IntegrateOptions {
    std::int64_t snapshot_stride = 0; // 0: no snapshots, only final state
    bool track_pair_distance = false; // running sup/series of |x_0 - x_1|
    bool per_step_ensemble_stats = false; // sup norm + diameter at snapshots
    const ScalarField* occupation = nullptr; // accumulate int g(X_t) dt per member
    std::vector<std::int64_t> segment_bounds; // occupation split points (step indices)
    ExecPolicy exec;
};

struct TrajectoryRecord {
    int dim = 0;
    std::int64_t n_members = 0;
    TimeGrid grid;
    std::int64_t stride = 0;

    std::vector<double> snapshot_times;
    std::vector<std::vector<double>> snapshots; // each n_members*dim, row-major

    std::vector<double> final_positions; // n_members*dim
    std::vector<std::int64_t> diverged_at; // -1 if finite throughout
    std::int64_t singular_hits = 0; // states exactly on the declared singular set

    // running statistics over *all* steps, regardless of striding
    std::vector<double> sup_norm;      // per member: sup_k |x_k|
    std::vector<double> min_norm;      // per member: inf_k |x_k|
    std::vector<double> end_norm;      // per member: |x_n|
    double pair_sup_distance = 0.0;    // members 0,1
    double pair_end_distance = 0.0;
    std::vector<double> pair_distance_series; // at snapshots (if tracked)

    std::vector<double> ensemble_sup_norm; // at snapshots, max over members
    std::vector<double> ensemble_diameter; // at snapshots
    double running_ensemble_sup = 0.0;     // over all steps and members

    // occupation integrals per member per segment (left-endpoint rule);
    // window values are sums of segment subtotals, so adjacent windows are
    // additive exactly
    std::vector<std::vector<double>> occupation_segments; // [member][segment]
    std::vector<std::vector<double>> occupation_dt;       // matching sums of dt

    int n_diverged() const {
        int n = 0;
        for (auto v : diverged_at) n += (v >= 0);
        return n;
    }
};

// Tamed Euler-Maruyama flow: every member consumes the identical increments
// (shared noise), so the run couples all initial conditions through one
// Brownian path. Deterministic given (model, initials, noise, grid, taming);
// results are identical for serial and OpenMP execution.
TrajectoryRecord integrate_flow(const SdeModel& model, const std::vector<double>& initials,
                                const NoisePath& noise, const TimeGrid& grid,
                                const TamingSpec& taming, const IntegrateOptions& opts = {});

// Position at time 0 of the solution started at x at time -t (t = whole
// number of steps), simulated forward from -t with the shifted noise.
std::vector<double> pullback_state(const SdeModel& model, const std::vector<double>& x,
                                   std::int64_t t_steps, const NoisePath& noise_anchored_at_zero,
                                   double dt, const TamingSpec& taming,
                                   bool* diverged = nullptr);

struct CocycleCheck {
    bool bit_exact = false;
    double max_deviation = 0.0;
};

// Simulates [0, s+t] directly and as composition [0,s] then [s, s+t] with the
// sub-path; the two runs perform the same floating-point operation sequence,
// so they must agree bitwise.
CocycleCheck verify_cocycle(const SdeModel& model, const std::vector<double>& x,
                            std::int64_t s_steps, std::int64_t t_steps, const NoisePath& noise,
                            const TamingSpec& taming = {});

// Boundary meshes used to track sets through the flow (endpoints, equal
// angles, Fibonacci sphere).
std::vector<double> boundary_mesh(int dim, double radius, int resolution);

// Trajectory export: columnar CSV and a compact binary snapshot format.
std::string trajectory_csv(const TrajectoryRecord& rec);
void write_trajectory_binary(const std::string& path, const TrajectoryRecord& rec);
struct BinarySnapshotHeader {
    std::uint32_t magic = 0x4f4c4653; // "SFLO"
    std::uint32_t version = 1;
    std::uint32_t dim = 0;
    std::uint64_t n_members = 0;
    std::uint64_t n_snapshots = 0;
    std::uint64_t stride = 0;
};
TrajectoryRecord read_trajectory_binary(const std::string& path);

} // namespace sdeflow
