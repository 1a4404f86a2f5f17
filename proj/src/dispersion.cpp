#include "sdeflow/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdeflow/io.hpp"
#include "sdeflow/parallel.hpp"
#include "sdeflow/rng.hpp"

namespace sdeflow {

void ChainingParams::validate() const {
    if (!(c1 > 0.0)) throw std::invalid_argument("chaining: c1 must be > 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("chaining: alpha must be > 0");
    if (!(c2 > 0.0)) throw std::invalid_argument("chaining: c2 must be > 0");
    if (c3 < 0.0) throw std::invalid_argument("chaining: c3 must be >= 0");
    if (delta_dim < 0.0 || delta_dim > d)
        throw std::invalid_argument("chaining: need 0 <= Delta <= d");
}

double rate_function_I(double gamma, const ChainingParams& p) {
    if (gamma < 0.0) throw std::invalid_argument("rate_function_I: gamma must be >= 0");
    p.validate();
    const double da = std::pow(double(p.d), p.alpha);
    const double lo = p.c1 * da;
    const double hi = p.c1 * (p.alpha + 1.0) * da;
    if (gamma <= lo) return 0.0;
    if (gamma <= hi) return p.d * (gamma - lo);
    return std::pow(gamma, 1.0 + 1.0 / p.alpha) * p.alpha *
           std::pow(1.0 + p.alpha, -1.0 - 1.0 / p.alpha) * std::pow(p.c1, -1.0 / p.alpha);
}

KappaResult kappa_from_constants(const ChainingParams& p, int force_branch) {
    p.validate();
    KappaResult r;
    bool first;
    if (force_branch == 1) {
        if (p.delta_dim >= p.d)
            throw std::invalid_argument("kappa: first branch needs Delta < d (gamma1 undefined)");
        first = true;
    } else if (force_branch == 2) {
        first = false;
    } else {
        first = p.delta_dim < p.d && double(p.d) / (p.d - p.delta_dim) < p.alpha + 1.0;
    }
    const double gamma =
        first ? p.c1 * std::pow(double(p.d), p.alpha + 1.0) / (p.d - p.delta_dim)
              : p.c1 * std::pow(p.delta_dim / p.alpha, p.alpha) *
                    std::pow(1.0 + p.alpha, 1.0 + p.alpha);
    r.branch = first ? 1 : 2;
    r.gamma_used = gamma;
    r.kappa = std::sqrt((p.c3 + gamma * p.delta_dim) / p.c2);
    return r;
}

TwoPointResult two_point_moment(const SdeModel& model, const std::vector<double>& x,
                                const std::vector<double>& y, double r, double T, double dt,
                                int replicas, std::uint64_t base_seed, const TamingSpec& taming,
                                const ExecPolicy& exec) {
    if (!(r >= 1.0)) throw std::invalid_argument("two_point_moment: need r >= 1");
    if (replicas < 2) throw std::invalid_argument("two_point_moment: need replicas >= 2");
    const auto n_steps = static_cast<std::int64_t>(std::llround(T / dt));
    TimeGrid grid(0.0, dt, n_steps);

    std::vector<double> initials(x);
    initials.insert(initials.end(), y.begin(), y.end());

    std::vector<double> sup_slots(replicas), end_slots(replicas);
    std::vector<char> ok(replicas, 0);
    IntegrateOptions opts;
    opts.track_pair_distance = true;
    opts.exec = exec;
    parallel_for_index(replicas, exec, [&](int rep) {
        NoisePath noise(derive_seed(base_seed, "two-point", rep), model.dim, grid);
        auto rec = integrate_flow(model, initials, noise, grid, taming, opts);
        if (rec.n_diverged() > 0) return;
        sup_slots[rep] = std::pow(rec.pair_sup_distance, r);
        end_slots[rep] = std::pow(rec.pair_end_distance, r);
        ok[rep] = 1;
    });
    std::vector<double> sup_vals, end_vals;
    sup_vals.reserve(replicas);
    int excluded = 0;
    for (int rep = 0; rep < replicas; ++rep) {
        if (!ok[rep]) {
            ++excluded;
            continue;
        }
        sup_vals.push_back(sup_slots[rep]);
        end_vals.push_back(end_slots[rep]);
    }

    TwoPointResult res;
    res.replicas = static_cast<int>(sup_vals.size());
    res.excluded = excluded;
    res.valid = excluded <= replicas / 10;
    if (sup_vals.empty()) {
        res.valid = false;
        return res;
    }
    auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
        double acc = 0.0;
        for (double t : v) acc += t;
        mean = acc / v.size();
        double var = 0.0;
        for (double t : v) var += (t - mean) * (t - mean);
        var /= std::max<std::size_t>(1, v.size() - 1);
        se = std::sqrt(var / v.size());
    };
    mean_se(sup_vals, res.sup_moment, res.sup_moment_se);
    mean_se(end_vals, res.end_moment, res.end_moment_se);
    return res;
}

FitResult fit_c1_alpha(const std::vector<MomentRow>& table, double alpha, double separation) {
    if (!(separation > 0.0)) throw std::invalid_argument("fit_c1_alpha: separation must be > 0");
    // group rows by r
    std::vector<double> rs;
    for (const auto& row : table) {
        if (!(row.moment > 0.0))
            throw std::invalid_argument("fit_c1_alpha: nonpositive moment estimate");
        if (std::find(rs.begin(), rs.end(), row.r) == rs.end()) rs.push_back(row.r);
    }
    std::sort(rs.begin(), rs.end());
    if (rs.size() < 2) throw std::invalid_argument("fit_c1_alpha: need >= 2 values of r");

    FitResult fit;
    fit.separation = separation;
    std::vector<double> c1_ests, c_ests;
    for (double r : rs) {
        std::vector<double> ts, ys; // y = log(moment^{1/r})
        for (const auto& row : table)
            if (row.r == r) {
                ts.push_back(row.T);
                ys.push_back(std::log(row.moment) / r);
            }
        if (ts.size() < 3) throw std::invalid_argument("fit_c1_alpha: need >= 3 values of T per r");
        // least squares y = a + s t
        double tm = 0, ym = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            tm += ts[i];
            ym += ys[i];
        }
        tm /= ts.size();
        ym /= ts.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            sxx += (ts[i] - tm) * (ts[i] - tm);
            sxy += (ts[i] - tm) * (ys[i] - ym);
        }
        if (!(sxx > 0.0)) throw std::invalid_argument("fit_c1_alpha: need >= 2 distinct T");
        const double slope = sxy / sxx;
        const double intercept = ym - slope * tm;
        for (std::size_t i = 0; i < ts.size(); ++i)
            fit.max_abs_residual =
                std::max(fit.max_abs_residual, std::fabs(ys[i] - intercept - slope * ts[i]));
        fit.r_values.push_back(r);
        fit.slopes_per_r.push_back(slope);
        c1_ests.push_back(slope / std::pow(r, alpha));
        c_ests.push_back(std::exp(intercept) / separation);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    fit.c1_hat = median(c1_ests);
    fit.c_hat = median(c_ests);
    return fit;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - lo;
    return (1.0 - w) * values[lo] + w * values[hi];
}

DispersionReport measure_dispersion(const SdeModel& model, double radius, int mesh_resolution,
                                    double T, double dt, int replicas, std::uint64_t base_seed,
                                    std::int64_t snapshot_stride, const TamingSpec& taming,
                                    const ExecPolicy& exec) {
    if (mesh_resolution < 1) throw std::invalid_argument("measure_dispersion: empty mesh");
    const auto mesh = boundary_mesh(model.dim, radius, mesh_resolution);
    const auto n_steps = static_cast<std::int64_t>(std::llround(T / dt));
    TimeGrid grid(0.0, dt, n_steps);
    if (snapshot_stride <= 0) snapshot_stride = std::max<std::int64_t>(1, n_steps / 64);

    DispersionReport rep;
    rep.mesh_resolution = mesh_resolution;
    rep.radius = radius;
    rep.T = T;
    rep.replicas = replicas;
    rep.base_seed = base_seed;

    IntegrateOptions opts;
    opts.snapshot_stride = snapshot_stride;
    opts.per_step_ensemble_stats = true;
    opts.exec = exec;
    rep.sup_norm.resize(replicas);
    rep.diameter.resize(replicas);
    rep.kappa_hat.resize(replicas);
    parallel_for_index(replicas, exec, [&](int r) {
        NoisePath noise(derive_seed(base_seed, "dispersion", r), model.dim, grid);
        auto rec = integrate_flow(model, mesh, noise, grid, taming, opts);
        if (r == 0) rep.times = rec.snapshot_times;
        rep.sup_norm[r] = std::move(rec.ensemble_sup_norm);
        rep.diameter[r] = std::move(rec.ensemble_diameter);
        rep.kappa_hat[r] = rec.running_ensemble_sup / T;
    });
    double acc = 0.0;
    for (double k : rep.kappa_hat) acc += k;
    rep.kappa_mean = acc / replicas;
    rep.kappa_q10 = quantile(rep.kappa_hat, 0.10);
    rep.kappa_q50 = quantile(rep.kappa_hat, 0.50);
    rep.kappa_q90 = quantile(rep.kappa_hat, 0.90);
    return rep;
}

std::string dispersion_csv(const DispersionReport& rep) {
    CsvWriter csv({"replica", "t", "sup_norm", "diameter"});
    for (std::size_t r = 0; r < rep.sup_norm.size(); ++r)
        for (std::size_t i = 0; i < rep.times.size(); ++i)
            csv.row({std::to_string(r), format_double(rep.times[i]),
                     format_double(rep.sup_norm[r][i]), format_double(rep.diameter[r][i])});
    return csv.data;
}

} // namespace sdeflow
