#include "sdeflow/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdeflow/parallel.hpp"
#include "sdeflow/rng.hpp"

namespace sdeflow {

namespace {

// Segment partition induced by the window boundaries: each window is a union
// of elementary segments and its value is the fixed-order sum of their
// subtotals.
struct Partition {
    std::vector<std::int64_t> bounds; // interior split points, in steps
    std::vector<std::pair<int, int>> window_span; // [first_segment, last_segment)
};

Partition build_partition(const std::vector<std::pair<double, double>>& windows, double dt,
                          std::int64_t n_steps) {
    std::vector<std::int64_t> marks;
    for (const auto& [s, t] : windows) {
        const auto ks = static_cast<std::int64_t>(std::llround(s / dt));
        const auto kt = static_cast<std::int64_t>(std::llround(t / dt));
        if (ks < 0 || kt <= ks || kt > n_steps)
            throw std::invalid_argument("verify_krylov: window outside the grid");
        marks.push_back(ks);
        marks.push_back(kt);
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    Partition part;
    for (std::int64_t m : marks)
        if (m > 0 && m < n_steps) part.bounds.push_back(m);
    // map each window onto its segment range
    auto seg_index = [&](std::int64_t k) {
        int idx = 0;
        for (std::int64_t b : part.bounds) {
            if (k >= b) ++idx;
        }
        return idx;
    };
    for (const auto& [s, t] : windows) {
        const auto ks = static_cast<std::int64_t>(std::llround(s / dt));
        const auto kt = static_cast<std::int64_t>(std::llround(t / dt));
        part.window_span.emplace_back(seg_index(ks), seg_index(kt - 1) + 1);
    }
    return part;
}

} // namespace

KrylovReport verify_krylov(const SdeModel& model, const OccupationFunctional& functional,
                           const std::vector<std::pair<double, double>>& windows,
                           const std::vector<double>& x0, double dt, int replicas,
                           std::uint64_t base_seed, const CalibrationSet& cal,
                           const TamingSpec& taming, const ExecPolicy& exec) {
    if (windows.empty()) throw std::invalid_argument("verify_krylov: no windows");
    if (!(functional.q > model.dim))
        throw std::invalid_argument("verify_krylov: need q > d");
    double t_max = 0.0;
    for (const auto& [s, t] : windows) t_max = std::max(t_max, t);
    const auto n_steps = static_cast<std::int64_t>(std::llround(t_max / dt));
    TimeGrid grid(0.0, dt, n_steps);
    const Partition part = build_partition(windows, dt, n_steps);

    const double gamma =
        gamma_factor(model.k1, model.k2, model.norm_grad_sigma, model.norm_b, model.p, model.rho,
                     model.dim);

    const int n_win = static_cast<int>(windows.size());

    IntegrateOptions opts;
    opts.occupation = &functional.f;
    opts.segment_bounds = part.bounds;
    opts.exec = exec;

    std::vector<std::vector<double>> slots(replicas);
    std::vector<char> ok(replicas, 0);
    parallel_for_index(replicas, exec, [&](int rep) {
        NoisePath noise(derive_seed(base_seed, "krylov", rep), model.dim, grid);
        auto rec = integrate_flow(model, x0, noise, grid, taming, opts);
        if (rec.n_diverged() > 0) return;
        std::vector<double> vals(n_win, 0.0);
        for (int w = 0; w < n_win; ++w) {
            double acc = 0.0;
            for (int s = part.window_span[w].first; s < part.window_span[w].second; ++s)
                acc += rec.occupation_segments[0][s];
            vals[w] = acc;
        }
        slots[rep] = std::move(vals);
        ok[rep] = 1;
    });

    int diverged = 0;
    std::vector<std::vector<double>> win_values(n_win);
    for (int rep = 0; rep < replicas; ++rep) {
        if (!ok[rep]) {
            ++diverged;
            continue;
        }
        for (int w = 0; w < n_win; ++w) win_values[w].push_back(slots[rep][w]);
    }

    KrylovReport report;
    report.gamma = gamma;
    report.replicas = replicas - diverged;
    report.diverged = diverged;
    double c_hat = 0.0;
    for (int w = 0; w < n_win; ++w) {
        KrylovWindow kw;
        kw.s = windows[w].first;
        kw.t = windows[w].second;
        const auto& vals = win_values[w];
        if (vals.empty()) throw std::runtime_error("verify_krylov: all replicas diverged");
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= vals.size();
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= std::max<std::size_t>(1, vals.size() - 1);
        kw.empirical = mean;
        kw.se = std::sqrt(var / vals.size());
        const double window = kw.t - kw.s;
        kw.bound_shape = gamma * (std::sqrt(window) / std::sqrt(model.k2) + window) *
                         functional.norm_f;
        kw.bound = cal.c_kry(functional.q) * kw.bound_shape;
        if (functional.norm_f == 0.0) {
            if (kw.empirical > 0.0)
                throw std::runtime_error(
                    "verify_krylov: |f| = 0 declared but empirical integral is nonzero");
            kw.c_hat = 0.0;
        } else {
            kw.c_hat = kw.empirical / kw.bound_shape;
        }
        kw.flagged = kw.empirical - 2.0 * kw.se > kw.bound;
        c_hat = std::max(c_hat, kw.c_hat);
        report.windows.push_back(kw);
    }
    report.c_hat = c_hat;
    return report;
}

KhasminskiiReport verify_khasminskii(const SdeModel& model, const OccupationFunctional& functional,
                                     double lambda, double T, double dt, int replicas,
                                     std::uint64_t base_seed, const CalibrationSet& cal,
                                     const TamingSpec& taming, const ExecPolicy& exec) {
    if (!(lambda > 0.0)) throw std::invalid_argument("verify_khasminskii: lambda must be > 0");
    if (!(T > 0.0)) throw std::invalid_argument("verify_khasminskii: T must be > 0");
    const auto n_steps = static_cast<std::int64_t>(std::llround(T / dt));
    TimeGrid grid(0.0, dt, n_steps);

    const double gamma =
        gamma_factor(model.k1, model.k2, model.norm_grad_sigma, model.norm_b, model.p, model.rho,
                     model.dim);

    IntegrateOptions opts;
    opts.occupation = &functional.f;
    opts.exec = exec;

    std::vector<double> x0(model.dim, 0.0);
    std::vector<double> slots(replicas);
    parallel_for_index(replicas, exec, [&](int rep) {
        NoisePath noise(derive_seed(base_seed, "khasminskii", rep), model.dim, grid);
        auto rec = integrate_flow(model, x0, noise, grid, taming, opts);
        slots[rep] = std::exp(lambda * rec.occupation_segments[0][0]);
    });
    std::vector<double> exps;
    int overflow = 0;
    for (double e : slots) {
        if (!std::isfinite(e)) {
            ++overflow;
            continue;
        }
        exps.push_back(e);
    }

    KhasminskiiReport rep;
    rep.gamma = gamma;
    rep.replicas = static_cast<int>(exps.size());
    rep.overflow_count = overflow;
    rep.lower_bound_only = overflow > 0;
    if (exps.empty()) throw std::runtime_error("verify_khasminskii: every replica overflowed");
    double mean = 0.0;
    for (double e : exps) mean += e;
    mean /= exps.size();
    rep.empirical = mean;
    // jackknife standard error of the mean
    const std::size_t n = exps.size();
    if (n > 1) {
        double total = mean * n;
        double jack_mean = 0.0;
        std::vector<double> loo(n);
        for (std::size_t i = 0; i < n; ++i) {
            loo[i] = (total - exps[i]) / (n - 1);
            jack_mean += loo[i];
        }
        jack_mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (loo[i] - jack_mean) * (loo[i] - jack_mean);
        rep.se = std::sqrt(var * (n - 1) / n);
    }
    const auto kb = khasminskii_bound(gamma, model.k2, lambda, T, functional.norm_f,
                                      functional.q, cal);
    rep.kappa = kb.kappa;
    rep.bound = kb.bound;
    rep.pass = rep.empirical - 2.0 * rep.se <= rep.bound && !rep.lower_bound_only;
    if (rep.lower_bound_only) rep.pass = false;
    return rep;
}

} // namespace sdeflow
