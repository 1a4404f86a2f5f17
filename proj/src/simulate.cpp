#include "sdeflow/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sdeflow/io.hpp"

namespace sdeflow {

std::string TamingSpec::name() const {
    switch (kind) {
        case Kind::none: return "none";
        case Kind::norm_clip: return "norm_clip";
        case Kind::soft: return "soft";
    }
    return "?";
}

namespace {

struct MemberScratch {
    std::vector<double> b;
    std::vector<double> sigma;
    std::vector<double> noise_disp;
};

// One tamed Euler-Maruyama step for one member. Update order is fixed:
// x <- (x + b_h(x) dt) + sigma(x) dW.
inline void step_member(const SdeModel& model, const TamingSpec& taming, double dt, double cap,
                        const double* w, const double* shared_noise_disp, double* x,
                        MemberScratch& s, std::int64_t step, std::int64_t* diverged_at,
                        std::atomic<std::int64_t>& singular_hits) {
    const int d = model.dim;
    model.drift(x, s.b.data());

    bool finite = true;
    for (int i = 0; i < d; ++i) finite = finite && std::isfinite(s.b[i]);
    if (!finite) {
        if (model.has_singular_set() && model.singular_distance(x) == 0.0) {
            // state exactly on the declared singular set: substitute the
            // clipped cap in the fixed reference direction e1 (measure-zero)
            s.b[0] = cap;
            for (int i = 1; i < d; ++i) s.b[i] = 0.0;
            singular_hits.fetch_add(1, std::memory_order_relaxed);
        } else {
            *diverged_at = step;
            return;
        }
    }

    if (taming.kind == TamingSpec::Kind::norm_clip) {
        double nb2 = 0.0;
        for (int i = 0; i < d; ++i) nb2 += s.b[i] * s.b[i];
        const double nb = std::sqrt(nb2);
        const double factor = (nb == 0.0) ? 1.0 : std::min(1.0, cap / nb);
        for (int i = 0; i < d; ++i) s.b[i] *= factor;
    } else if (taming.kind == TamingSpec::Kind::soft) {
        double nb2 = 0.0;
        for (int i = 0; i < d; ++i) nb2 += s.b[i] * s.b[i];
        const double factor = 1.0 / (1.0 + dt * std::sqrt(nb2));
        for (int i = 0; i < d; ++i) s.b[i] *= factor;
    }

    const double* nd;
    if (shared_noise_disp) {
        nd = shared_noise_disp;
    } else {
        model.diffusion.eval(x, s.sigma.data());
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += s.sigma[i * d + j] * w[j];
            s.noise_disp[i] = acc;
        }
        nd = s.noise_disp.data();
    }

    bool ok = true;
    for (int i = 0; i < d; ++i) {
        x[i] = (x[i] + s.b[i] * dt) + nd[i];
        ok = ok && std::isfinite(x[i]);
    }
    if (!ok) *diverged_at = step;
}

inline double norm2(const double* x, int d) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += x[i] * x[i];
    return std::sqrt(acc);
}

inline double pair_distance(const double* pos, int d) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
        const double dd = pos[i] - pos[d + i];
        acc += dd * dd;
    }
    return std::sqrt(acc);
}

double ensemble_diameter_of(const std::vector<double>& pos, std::int64_t n, int d) {
    double best = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) {
                const double dd = pos[i * d + k] - pos[j * d + k];
                acc += dd * dd;
            }
            best = std::max(best, std::sqrt(acc));
        }
    return best;
}

} // namespace

TrajectoryRecord integrate_flow(const SdeModel& model, const std::vector<double>& initials,
                                const NoisePath& noise, const TimeGrid& grid,
                                const TamingSpec& taming, const IntegrateOptions& opts) {
    model.validate();
    const int d = model.dim;
    if (initials.empty() || initials.size() % d != 0)
        throw std::invalid_argument("integrate_flow: initials must be a nonempty multiple of dim");
    if (noise.dim != d) throw std::invalid_argument("integrate_flow: noise.dim != model.dim");
    if (noise.grid.dt != grid.dt || noise.grid.t_start != grid.t_start ||
        noise.grid.n_steps < grid.n_steps)
        throw std::invalid_argument("integrate_flow: noise grid misaligned with simulation grid");

    const std::int64_t n = static_cast<std::int64_t>(initials.size()) / d;
    const double dt = grid.dt;
    const double cap = taming.cap_scale / std::sqrt(dt);

    TrajectoryRecord rec;
    rec.dim = d;
    rec.n_members = n;
    rec.grid = grid;
    rec.stride = opts.snapshot_stride;
    rec.final_positions = initials;
    rec.diverged_at.assign(n, -1);
    rec.sup_norm.assign(n, 0.0);
    rec.min_norm.assign(n, 0.0);
    rec.end_norm.assign(n, 0.0);

    std::vector<double>& pos = rec.final_positions;

    const int n_segments =
        opts.occupation ? static_cast<int>(opts.segment_bounds.size()) + 1 : 0;
    if (opts.occupation) {
        rec.occupation_segments.assign(n, std::vector<double>(n_segments, 0.0));
        rec.occupation_dt.assign(n, std::vector<double>(n_segments, 0.0));
        for (std::size_t i = 1; i < opts.segment_bounds.size(); ++i)
            if (opts.segment_bounds[i] <= opts.segment_bounds[i - 1])
                throw std::invalid_argument("integrate_flow: segment bounds must increase");
    }

    for (std::int64_t m = 0; m < n; ++m) {
        const double nm = norm2(&pos[m * d], d);
        rec.sup_norm[m] = nm;
        rec.min_norm[m] = nm;
        rec.running_ensemble_sup = std::max(rec.running_ensemble_sup, nm);
    }
    if (opts.track_pair_distance) {
        if (n < 2) throw std::invalid_argument("integrate_flow: pair tracking needs 2 members");
        rec.pair_sup_distance = pair_distance(pos.data(), d);
        rec.pair_end_distance = rec.pair_sup_distance;
    }

    auto record_snapshot = [&](std::int64_t k) {
        rec.snapshot_times.push_back(grid.time(k));
        rec.snapshots.push_back(pos);
        if (opts.per_step_ensemble_stats) {
            double sup = 0.0;
            for (std::int64_t m = 0; m < n; ++m) sup = std::max(sup, norm2(&pos[m * d], d));
            rec.ensemble_sup_norm.push_back(sup);
            rec.ensemble_diameter.push_back(ensemble_diameter_of(pos, n, d));
        }
        if (opts.track_pair_distance)
            rec.pair_distance_series.push_back(pair_distance(pos.data(), d));
    };

    if (opts.snapshot_stride > 0) record_snapshot(0);

    const bool shared_noise = model.diffusion.is_constant;
    std::vector<double> w(d), shared_disp(d);
    std::atomic<std::int64_t> singular_hits{0};

#ifdef _OPENMP
    // member-level parallelism only pays off for large ensembles; small ones
    // are usually driven from an already-parallel replica loop
    const bool use_omp = !opts.exec.serial() && n >= 512 && !omp_in_parallel();
    const int nthreads = use_omp ? (opts.exec.threads > 0 ? opts.exec.threads
                                                          : omp_get_max_threads())
                                 : 1;
#else
    const bool use_omp = false;
    const int nthreads = 1;
#endif
    std::vector<MemberScratch> scratch(std::max(1, nthreads));
    for (auto& s : scratch) {
        s.b.assign(d, 0.0);
        s.sigma.assign(d * d, 0.0);
        s.noise_disp.assign(d, 0.0);
    }

    const double* sd = nullptr;
    int seg = 0;

    // per-step shared prep; executed by one thread, before the member loop
    auto step_prep = [&](std::int64_t k) {
        noise.increment(k, w.data());
        if (shared_noise) {
            const auto& sig = model.diffusion.constant_value;
            for (int i = 0; i < d; ++i) {
                double acc = 0.0;
                for (int j = 0; j < d; ++j) acc += sig[i * d + j] * w[j];
                shared_disp[i] = acc;
            }
            sd = shared_disp.data();
        }
        if (opts.occupation) {
            while (seg < static_cast<int>(opts.segment_bounds.size()) &&
                   k >= opts.segment_bounds[seg])
                ++seg;
        }
    };

    auto advance_member = [&](std::int64_t m, std::int64_t k, MemberScratch& s) {
        if (rec.diverged_at[m] >= 0) return;
        if (opts.occupation) {
            const double g = opts.occupation->eval(&pos[m * d]);
            rec.occupation_segments[m][seg] += g * dt;
            rec.occupation_dt[m][seg] += dt;
        }
        step_member(model, taming, dt, cap, w.data(), sd, &pos[m * d], s, k,
                    &rec.diverged_at[m], singular_hits);
        if (rec.diverged_at[m] < 0) {
            const double nm = norm2(&pos[m * d], d);
            rec.sup_norm[m] = std::max(rec.sup_norm[m], nm);
            rec.min_norm[m] = std::min(rec.min_norm[m], nm);
        }
    };

    // per-step bookkeeping; runs after the member barrier, fixed order
    auto step_post = [&](std::int64_t k) {
        if (opts.track_pair_distance && rec.diverged_at[0] < 0 && rec.diverged_at[1] < 0)
            rec.pair_sup_distance = std::max(rec.pair_sup_distance, pair_distance(pos.data(), d));
        if (opts.snapshot_stride > 0 &&
            ((k + 1) % opts.snapshot_stride == 0 || k + 1 == grid.n_steps))
            record_snapshot(k + 1);
    };

    const bool need_post = opts.track_pair_distance || opts.snapshot_stride > 0;
    if (use_omp) {
#ifdef _OPENMP
        // one parallel region for the whole run; the step barrier is the
        // implicit barrier of the member loop
#pragma omp parallel num_threads(nthreads)
        {
            MemberScratch& s = scratch[omp_get_thread_num()];
            for (std::int64_t k = 0; k < grid.n_steps; ++k) {
#pragma omp single
                step_prep(k);
#pragma omp for schedule(static)
                for (std::int64_t m = 0; m < n; ++m) advance_member(m, k, s);
                if (need_post) {
#pragma omp single
                    step_post(k);
                }
            }
        }
#endif
    } else {
        for (std::int64_t k = 0; k < grid.n_steps; ++k) {
            step_prep(k);
            for (std::int64_t m = 0; m < n; ++m) advance_member(m, k, scratch[0]);
            step_post(k);
        }
    }

    for (std::int64_t m = 0; m < n; ++m) rec.end_norm[m] = norm2(&pos[m * d], d);
    if (opts.track_pair_distance) rec.pair_end_distance = pair_distance(pos.data(), d);
    // sup over members and steps equals the max of the per-member sups (max
    // has no rounding, so the reduction order does not matter)
    for (std::int64_t m = 0; m < n; ++m)
        rec.running_ensemble_sup = std::max(rec.running_ensemble_sup, rec.sup_norm[m]);
    rec.singular_hits = singular_hits.load();
    return rec;
}

std::vector<double> pullback_state(const SdeModel& model, const std::vector<double>& x,
                                   std::int64_t t_steps, const NoisePath& noise_anchored_at_zero,
                                   double dt, const TamingSpec& taming, bool* diverged) {
    if (t_steps < 0) throw std::invalid_argument("pullback_state: depth must be >= 0");
    TimeGrid grid(-static_cast<double>(t_steps) * dt, dt, t_steps);
    NoisePath shifted(noise_anchored_at_zero.seed, noise_anchored_at_zero.dim, grid,
                      noise_anchored_at_zero.step_offset - t_steps);
    auto rec = integrate_flow(model, x, shifted, grid, taming);
    if (diverged) *diverged = rec.n_diverged() > 0;
    std::vector<double> out(rec.final_positions.begin(),
                            rec.final_positions.begin() + model.dim);
    return out;
}

CocycleCheck verify_cocycle(const SdeModel& model, const std::vector<double>& x,
                            std::int64_t s_steps, std::int64_t t_steps, const NoisePath& noise,
                            const TamingSpec& taming) {
    if (noise.grid.n_steps < s_steps + t_steps)
        throw std::invalid_argument("verify_cocycle: noise grid too short");
    TimeGrid full(noise.grid.t_start, noise.grid.dt, s_steps + t_steps);
    auto direct = integrate_flow(model, x, noise, full, taming);

    TimeGrid leg1(noise.grid.t_start, noise.grid.dt, s_steps);
    auto first = integrate_flow(model, x, noise, leg1, taming);
    NoisePath sub = noise.subpath(s_steps, t_steps);
    auto second = integrate_flow(model, first.final_positions, sub, sub.grid, taming);

    CocycleCheck c;
    c.bit_exact = true;
    for (std::size_t i = 0; i < direct.final_positions.size(); ++i) {
        const double a = direct.final_positions[i];
        const double b = second.final_positions[i];
        if (std::memcmp(&a, &b, sizeof(double)) != 0) c.bit_exact = false;
        c.max_deviation = std::max(c.max_deviation, std::fabs(a - b));
    }
    return c;
}

std::vector<double> boundary_mesh(int dim, double radius, int resolution) {
    const auto dirs = unit_directions(dim, dim == 1 ? 2 : resolution);
    std::vector<double> mesh;
    mesh.reserve(dirs.size() * dim);
    for (const auto& u : dirs)
        for (int i = 0; i < dim; ++i) mesh.push_back(radius * u[i]);
    return mesh;
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
    std::string out = "time,member";
    for (int i = 0; i < rec.dim; ++i) out += ",x" + std::to_string(i);
    out += "\n";
    for (std::size_t s = 0; s < rec.snapshots.size(); ++s)
        for (std::int64_t m = 0; m < rec.n_members; ++m) {
            out += format_double(rec.snapshot_times[s]);
            out += ",";
            out += std::to_string(m);
            for (int i = 0; i < rec.dim; ++i) {
                out += ",";
                out += format_double(rec.snapshots[s][m * rec.dim + i]);
            }
            out += "\n";
        }
    return out;
}

void write_trajectory_binary(const std::string& path, const TrajectoryRecord& rec) {
    BinarySnapshotHeader h;
    h.dim = static_cast<std::uint32_t>(rec.dim);
    h.n_members = static_cast<std::uint64_t>(rec.n_members);
    h.n_snapshots = static_cast<std::uint64_t>(rec.snapshots.size());
    h.stride = static_cast<std::uint64_t>(rec.stride);
    std::string bytes;
    bytes.append(reinterpret_cast<const char*>(&h), sizeof(h));
    for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
        bytes.append(reinterpret_cast<const char*>(&rec.snapshot_times[s]), sizeof(double));
        bytes.append(reinterpret_cast<const char*>(rec.snapshots[s].data()),
                     rec.snapshots[s].size() * sizeof(double));
    }
    atomic_write_file(path, bytes);
}

TrajectoryRecord read_trajectory_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    BinarySnapshotHeader h;
    in.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (!in || h.magic != BinarySnapshotHeader{}.magic)
        throw std::runtime_error("bad snapshot header in " + path);
    TrajectoryRecord rec;
    rec.dim = static_cast<int>(h.dim);
    rec.n_members = static_cast<std::int64_t>(h.n_members);
    rec.stride = static_cast<std::int64_t>(h.stride);
    for (std::uint64_t s = 0; s < h.n_snapshots; ++s) {
        double t = 0;
        in.read(reinterpret_cast<char*>(&t), sizeof(double));
        std::vector<double> snap(h.n_members * h.dim);
        in.read(reinterpret_cast<char*>(snap.data()), snap.size() * sizeof(double));
        if (!in) throw std::runtime_error("truncated snapshot file " + path);
        rec.snapshot_times.push_back(t);
        rec.snapshots.push_back(std::move(snap));
    }
    return rec;
}

} // namespace sdeflow
