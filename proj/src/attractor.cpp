#include "sdeflow/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdeflow/io.hpp"
#include "sdeflow/model.hpp"
#include "sdeflow/parallel.hpp"
#include "sdeflow/rng.hpp"

namespace sdeflow {

void wilson_interval(int passes, int n, double& lo, double& hi) {
    if (n == 0) {
        lo = hi = 0.0;
        return;
    }
    const double z = 1.959963984540054;
    const double phat = double(passes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    lo = std::max(0.0, center - half);
    hi = std::min(1.0, center + half);
}

ProbabilityReport pullback_absorption(const SdeModel& model, const AbsorptionScenario& sc,
                                      std::uint64_t base_seed, const TamingSpec& taming,
                                      const ExecPolicy& exec, double beta_advisory,
                                      double beta_zero_advisory) {
    if (!(sc.r > 0.0) || sc.gamma < 0.0)
        throw std::invalid_argument("pullback_absorption: need r > 0, gamma >= 0");
    for (double t : sc.depths)
        if (t > sc.horizon || t <= 0.0)
            throw std::invalid_argument("pullback_absorption: depths must lie in (0, horizon]");

    ProbabilityReport rep;
    rep.replicas = sc.replicas;
    rep.beta_margin = -beta_advisory - beta_zero_advisory; // (-beta) - beta0, > 0 favorable
    const auto max_steps = static_cast<std::int64_t>(std::llround(sc.horizon / sc.dt));
    TimeGrid anchor_grid(-sc.horizon, sc.dt, max_steps);

    IntegrateOptions opts;
    opts.exec = exec;

    rep.flags.assign(sc.replicas, 0);
    std::vector<char> diverged_flags(sc.replicas, 0);
    parallel_for_index(sc.replicas, exec, [&](int rep_i) {
        // one noise environment per replica, frozen across depths
        NoisePath noise(derive_seed(base_seed, "pullback", rep_i), model.dim, anchor_grid, 0);
        bool ok = true;
        for (double t : sc.depths) {
            if (!ok) break;
            const auto steps = static_cast<std::int64_t>(std::llround(t / sc.dt));
            const double start_radius = sc.gamma * t;
            std::vector<double> starts;
            if (start_radius > 0.0) {
                starts = boundary_mesh(model.dim, start_radius, sc.mesh_resolution);
                for (int i = 0; i < model.dim; ++i) starts.push_back(0.0); // interior witness
            } else {
                starts.assign(model.dim, 0.0);
            }
            TimeGrid grid(-t, sc.dt, steps);
            NoisePath sub(noise.seed, model.dim, grid, -steps);
            auto recr = integrate_flow(model, starts, sub, grid, taming, opts);
            if (recr.n_diverged() > 0) {
                ok = false;
                diverged_flags[rep_i] = 1;
                break;
            }
            for (double en : recr.end_norm)
                if (en > sc.r) {
                    ok = false;
                    break;
                }
        }
        rep.flags[rep_i] = ok ? 1 : 0;
    });
    for (int i = 0; i < sc.replicas; ++i) {
        rep.passes += rep.flags[i];
        if (diverged_flags[i]) rep.notes = "diverged member";
    }
    rep.probability = double(rep.passes) / std::max(1, rep.replicas);
    wilson_interval(rep.passes, rep.replicas, rep.ci_low, rep.ci_high);
    return rep;
}

namespace {

// winding number of a closed planar polygon around the origin
int winding_number(const std::vector<double>& pts, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x1 = pts[2 * i], y1 = pts[2 * i + 1];
        const int k = (i + 1) % n;
        const double x2 = pts[2 * k], y2 = pts[2 * k + 1];
        total += std::atan2(x1 * y2 - y1 * x2, x1 * x2 + y1 * y2);
    }
    return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

} // namespace

ExpansionReport forward_expansion(const SdeModel& model, double r, double gamma, double horizon,
                                  const std::vector<double>& sample_times, int mesh_resolution,
                                  int replicas, double dt, std::uint64_t base_seed,
                                  const TamingSpec& taming, const ExecPolicy& exec) {
    if (sample_times.empty())
        throw std::invalid_argument("forward_expansion: no sample times");
    ExpansionReport rep;
    rep.replicas = replicas;

    const auto n_steps = static_cast<std::int64_t>(std::llround(horizon / dt));
    TimeGrid grid(0.0, dt, n_steps);
    std::vector<std::int64_t> sample_steps;
    for (double t : sample_times) {
        if (t <= 0.0 || t > horizon)
            throw std::invalid_argument("forward_expansion: sample times must lie in (0, horizon]");
        sample_steps.push_back(static_cast<std::int64_t>(std::llround(t / dt)));
    }

    const int mesh_n = model.dim == 1 ? 2 : mesh_resolution;
    std::vector<double> starts = boundary_mesh(model.dim, r, mesh_resolution);
    for (int i = 0; i < model.dim; ++i) starts.push_back(0.0); // origin-started witness

    IntegrateOptions opts;
    opts.snapshot_stride = 1;
    opts.exec = exec;

    rep.flags.assign(replicas, 0);
    std::vector<char> witness_flags(replicas, 0);
    parallel_for_index(replicas, exec, [&](int rep_i) {
        NoisePath noise(derive_seed(base_seed, "expansion", rep_i), model.dim, grid);
        auto recr = integrate_flow(model, starts, noise, grid, taming, opts);
        bool ok = recr.n_diverged() == 0;
        bool witness_ok = ok;
        if (ok) {
            for (std::int64_t ks : sample_steps) {
                const auto& snap = recr.snapshots[static_cast<std::size_t>(ks)];
                const double target = gamma * grid.time(ks);
                // boundary image norm lower bound
                double minn = std::numeric_limits<double>::infinity();
                for (int m = 0; m < mesh_n; ++m) {
                    double acc = 0.0;
                    for (int c = 0; c < model.dim; ++c)
                        acc += snap[m * model.dim + c] * snap[m * model.dim + c];
                    minn = std::min(minn, std::sqrt(acc));
                }
                if (minn < target) {
                    ok = false;
                    break;
                }
                if (target > 0.0) {
                    // interior containment witness
                    if (model.dim == 1) {
                        const double a = snap[0], b = snap[1];
                        if (!(std::min(a, b) <= -target && std::max(a, b) >= target)) ok = false;
                    } else if (model.dim == 2) {
                        if (std::abs(winding_number(snap, mesh_n)) != 1) ok = false;
                    } else {
                        double acc = 0.0;
                        for (int c = 0; c < model.dim; ++c) {
                            const double w = snap[mesh_n * model.dim + c];
                            acc += w * w;
                        }
                        if (std::sqrt(acc) >= target) ok = false;
                    }
                    // the origin-image witness, tracked separately
                    double acc = 0.0;
                    for (int c = 0; c < model.dim; ++c) {
                        const double w = snap[mesh_n * model.dim + c];
                        acc += w * w;
                    }
                    if (std::sqrt(acc) >= target) witness_ok = false;
                    if (!ok) break;
                }
            }
        }
        rep.flags[rep_i] = ok ? 1 : 0;
        witness_flags[rep_i] = (witness_ok && ok) ? 1 : 0;
    });
    int witness_passes = 0;
    for (int i = 0; i < replicas; ++i) {
        rep.passes += rep.flags[i];
        witness_passes += witness_flags[i];
    }
    rep.probability = double(rep.passes) / std::max(1, replicas);
    rep.origin_witness_probability = double(witness_passes) / std::max(1, replicas);
    wilson_interval(rep.passes, replicas, rep.ci_low, rep.ci_high);
    return rep;
}

Lemma61Bound lemma61_bound(int case_id, const Lemma61Params& p) {
    if (p.T < 0.0) throw std::invalid_argument("lemma61_bound: T must be >= 0");
    Lemma61Bound b;
    const double g = (p.gamma_factor * p.gamma_factor * std::pow(p.norm_b1, 4.0) +
                      p.k2 * p.k2 * p.gamma_factor * p.norm_b1 * p.norm_b1) /
                     (p.k1 * p.k2 * p.k2);
    b.girsanov_exponent = p.T * g;
    const double sk2 = std::sqrt(p.k2);

    auto positive_part = [](double v) { return v > 0.0 ? v : 0.0; };

    double prefactor = 2.0;
    double distance_exponent = 0.0; // subtracted from the Girsanov exponent
    switch (case_id) {
        case 1: {
            if (!(p.r >= 1.0 && p.r1 > p.r && p.r2 > p.r))
                throw std::invalid_argument("lemma61 case 1: need r1, r2 > r >= 1");
            prefactor = 2.0;
            if (p.T == 0.0) {
                distance_exponent =
                    (p.r2 > p.r1) ? std::numeric_limits<double>::infinity() : 0.0;
            } else {
                const double sT = std::sqrt(p.T);
                const double arg =
                    positive_part(-(p.r2 - p.r1) / (sk2 * sT) - sT * p.beta_star / sk2);
                distance_exponent = 0.25 * arg * arg;
            }
            break;
        }
        case 2: {
            if (!(p.R >= p.r && p.r >= 1.0))
                throw std::invalid_argument("lemma61 case 2: need R >= r >= 1");
            prefactor = 4.0;
            distance_exponent = p.T == 0.0 ? std::numeric_limits<double>::infinity()
                                           : (p.R - p.r) * (p.R - p.r) / (16.0 * p.k2 * p.T);
            break;
        }
        case 3: {
            if (!(p.delta > 0.0 && p.delta1 > 0.0))
                throw std::invalid_argument("lemma61 case 3: need delta, delta1 > 0");
            prefactor = 6.0;
            distance_exponent = p.delta * p.delta / (16.0 * p.k2 * p.delta1);
            break;
        }
        case 4: {
            if (!(p.r >= 1.0 && p.r1 > p.r && p.r2 > p.r))
                throw std::invalid_argument("lemma61 case 4: need r1, r2 > r >= 1");
            prefactor = 2.0;
            if (p.T == 0.0) {
                distance_exponent =
                    (p.r2 > p.r1) ? std::numeric_limits<double>::infinity() : 0.0;
            } else {
                const double sT = std::sqrt(p.T);
                const double arg =
                    positive_part(sT * p.beta_lower / sk2 - (p.r2 - p.r1) / (sk2 * sT));
                distance_exponent = 0.25 * arg * arg;
            }
            break;
        }
        case 5: {
            if (!(p.r >= 1.0 && p.r1 > p.r))
                throw std::invalid_argument("lemma61 case 5: need r1 > r >= 1");
            prefactor = 2.0;
            distance_exponent = (p.r1 - p.r) * p.beta_lower / p.k2;
            break;
        }
        default:
            throw std::invalid_argument("lemma61_bound: case must be 1..5");
    }
    b.value = prefactor * std::exp(b.girsanov_exponent - distance_exponent);
    b.vacuous = !(b.value < 1.0);
    return b;
}

FalsifyReport lemma61_falsify(const SdeModel& model, int case_id, const Lemma61Params& p,
                              int replicas, double dt, std::uint64_t base_seed,
                              const TamingSpec& taming, const ExecPolicy& exec) {
    auto bound = lemma61_bound(case_id, p);
    FalsifyReport rep;
    rep.bound = bound.value;
    rep.bound_vacuous = bound.vacuous;
    rep.replicas = replicas;

    double horizon = p.T;
    double start_radius = 0.0;
    switch (case_id) {
        case 1:
            start_radius = p.r2;
            rep.event = "|psi_T(x)| >= r1 and inf_{t<=T} |psi_t(x)| >= r, |x| = r2";
            break;
        case 2:
            start_radius = p.r1 > 0.0 ? p.r1 : p.R;
            rep.event = "|psi_T(x)| >= R and inf_{t<=T} |psi_t(x)| <= r";
            break;
        case 3:
            start_radius = p.R;
            horizon = p.delta1;
            rep.event = "sup_{s<=delta1} |psi_s(x)| >= R + delta, |x| = R";
            break;
        case 4:
            start_radius = p.r1;
            rep.event = "|psi_T(x)| <= r2 and inf_{t<=T} |psi_t(x)| >= r, |x| = r1";
            break;
        case 5:
            start_radius = p.r1;
            rep.event = "inf_{t<=T} |psi_t(x)| <= r, |x| = r1 (event truncated at T)";
            break;
        default:
            throw std::invalid_argument("lemma61_falsify: case must be 1..5");
    }

    const auto n_steps = static_cast<std::int64_t>(std::llround(horizon / dt));
    TimeGrid grid(0.0, dt, n_steps);
    // deterministic start on the first axis
    std::vector<double> x0(model.dim, 0.0);
    x0[0] = start_radius;

    IntegrateOptions opts;
    opts.exec = exec;

    std::vector<char> hit_flags(replicas, 0);
    parallel_for_index(replicas, exec, [&](int rep_i) {
        NoisePath noise(derive_seed(base_seed, "lemma61", rep_i), model.dim, grid);
        auto recr = integrate_flow(model, x0, noise, grid, taming, opts);
        if (recr.n_diverged() > 0) return;
        const double end = recr.end_norm[0];
        const double mn = recr.min_norm[0];
        const double sup = recr.sup_norm[0];
        bool hit = false;
        switch (case_id) {
            case 1: hit = end >= p.r1 && mn >= p.r; break;
            case 2: hit = end >= p.R && mn <= p.r; break;
            case 3: hit = sup >= p.R + p.delta; break;
            case 4: hit = end <= p.r2 && mn >= p.r; break;
            case 5: hit = mn <= p.r; break;
        }
        hit_flags[rep_i] = hit ? 1 : 0;
    });
    int hits = 0;
    for (char h : hit_flags) hits += h;
    rep.empirical = double(hits) / std::max(1, replicas);
    rep.se = std::sqrt(rep.empirical * (1.0 - rep.empirical) / std::max(1, replicas));
    rep.violation = rep.empirical - 2.0 * rep.se > rep.bound;
    return rep;
}

CriterionMatrix criterion_matrix(const SdeModel& model, const std::vector<double>& r_grid,
                                 const std::vector<double>& R_grid, double horizon,
                                 const std::vector<double>& depths, int mesh_resolution,
                                 int replicas, double dt, std::uint64_t base_seed,
                                 const TamingSpec& taming, const ExecPolicy& exec) {
    if (r_grid.empty() || R_grid.empty() || depths.empty())
        throw std::invalid_argument("criterion_matrix: empty grids");
    CriterionMatrix m;
    m.r_grid = r_grid;
    m.R_grid = R_grid;
    m.depths = depths;
    m.replicas = replicas;
    m.probability.assign(r_grid.size(), std::vector<double>(R_grid.size(), 0.0));

    const auto max_steps = static_cast<std::int64_t>(std::llround(horizon / dt));
    TimeGrid anchor_grid(-horizon, dt, max_steps);

    IntegrateOptions opts;
    opts.exec = exec;

    // per replica: pull back every mesh once per depth, then evaluate every
    // (r, R) cell on the shared end norms (mandatory reuse; this is what
    // makes the entries nest exactly in R and in horizon)
    std::vector<std::vector<std::vector<char>>> pass_slots(
        replicas,
        std::vector<std::vector<char>>(r_grid.size(), std::vector<char>(R_grid.size(), 0)));

    parallel_for_index(replicas, exec, [&](int rep_i) {
        NoisePath noise(derive_seed(base_seed, "criterion-matrix", rep_i), model.dim, anchor_grid,
                        0);
        std::vector<std::vector<std::vector<double>>> end_norms(
            depths.size(), std::vector<std::vector<double>>(r_grid.size()));
        bool diverged = false;
        for (std::size_t di = 0; di < depths.size(); ++di) {
            const auto steps = static_cast<std::int64_t>(std::llround(depths[di] / dt));
            TimeGrid grid(-depths[di], dt, steps);
            NoisePath sub(noise.seed, model.dim, grid, -steps);
            for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
                std::vector<double> starts = boundary_mesh(model.dim, r_grid[ri], mesh_resolution);
                for (int i = 0; i < model.dim; ++i) starts.push_back(0.0);
                auto recr = integrate_flow(model, starts, sub, grid, taming, opts);
                if (recr.n_diverged() > 0) diverged = true;
                end_norms[di][ri] = recr.end_norm;
            }
        }
        for (std::size_t ri = 0; ri < r_grid.size(); ++ri)
            for (std::size_t Ri = 0; Ri < R_grid.size(); ++Ri) {
                bool ok = !diverged;
                for (std::size_t di = 0; ok && di < depths.size(); ++di)
                    for (double en : end_norms[di][ri])
                        if (en > R_grid[Ri]) {
                            ok = false;
                            break;
                        }
                pass_slots[rep_i][ri][Ri] = ok ? 1 : 0;
            }
    });
    std::vector<std::vector<int>> counts(r_grid.size(), std::vector<int>(R_grid.size(), 0));
    for (int rep_i = 0; rep_i < replicas; ++rep_i)
        for (std::size_t ri = 0; ri < r_grid.size(); ++ri)
            for (std::size_t Ri = 0; Ri < R_grid.size(); ++Ri)
                counts[ri][Ri] += pass_slots[rep_i][ri][Ri];
    for (std::size_t ri = 0; ri < r_grid.size(); ++ri)
        for (std::size_t Ri = 0; Ri < R_grid.size(); ++Ri)
            m.probability[ri][Ri] = double(counts[ri][Ri]) / std::max(1, replicas);
    return m;
}

std::string criterion_matrix_csv(const CriterionMatrix& m) {
    CsvWriter csv({"r", "R", "probability"});
    for (std::size_t ri = 0; ri < m.r_grid.size(); ++ri)
        for (std::size_t Ri = 0; Ri < m.R_grid.size(); ++Ri)
            csv.row({format_double(m.r_grid[ri]), format_double(m.R_grid[Ri]),
                     format_double(m.probability[ri][Ri])});
    return csv.data;
}

double candidate_r0(const SdeModel& model, double r_min, double r_max, double shell_cap,
                    int samples) {
    auto value = [&](double r) { return beta_star(model, r, std::max(shell_cap, r + 1.0), samples).value; };
    if (value(r_min) <= 0.0) return r_min;
    if (value(r_max) > 0.0) return std::numeric_limits<double>::quiet_NaN();
    double lo = r_min, hi = r_max;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) <= 0.0) hi = mid;
        else lo = mid;
    }
    return hi;
}

} // namespace sdeflow
