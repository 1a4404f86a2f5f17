#include "sdeflow/scenarios.hpp"

#include <cmath>
#include <stdexcept>

#include "sdeflow/constants.hpp"
#include "sdeflow/parallel.hpp"
#include "sdeflow/rng.hpp"

namespace sdeflow {

namespace {

// V(y) = int_0^y clamp(-s, -1, 1) ds
double clamped_potential(double y) {
    const double a = std::fabs(y);
    if (a <= 1.0) return -0.5 * y * y;
    return -(a - 0.5);
}

double simpson(double a, double b, int n, const std::function<double(double)>& f) {
    // n even
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double converge_simpson(double a, double b, const std::function<double(double)>& f,
                        const char* what) {
    double prev = simpson(a, b, 128, f);
    for (int n = 256; n <= (1 << 22); n *= 2) {
        const double cur = simpson(a, b, n, f);
        if (std::fabs(cur - prev) <= 1e-12 * (std::fabs(cur) + 1e-300)) return cur;
        prev = cur;
    }
    throw std::runtime_error(std::string("example25 quadrature did not converge: ") + what);
}

} // namespace

double example25_stationary_mean(double epsilon, double q) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("example25: epsilon must be > 0");
    if (q < 0.0 || q >= 0.25)
        throw std::invalid_argument("example25: q must lie in [0, 1/4)");
    const double e2 = epsilon * epsilon;
    auto weight = [&](double y) { return std::exp(2.0 * clamped_potential(y) / e2); };
    const double y_max = 1.0 + std::max(1.0, 25.0 * e2); // weight ~ exp(-2(y-1)/eps^2) beyond 1

    // denominator: 2 int_0^ymax w
    const double den =
        2.0 * converge_simpson(0.0, y_max, [&](double y) { return weight(y); }, "denominator");

    // numerator: 2 [ int_0^1 y^-q w dy + int_1^ymax y^-q w dy ]; the first
    // piece under u = y^{1-q} has a smooth integrand
    const double s = 1.0 - q;
    const double inner = converge_simpson(
        0.0, 1.0, [&](double u) { return weight(std::pow(u, 1.0 / s)) / s; }, "singular piece");
    const double outer = converge_simpson(
        1.0, y_max, [&](double y) { return std::pow(y, -q) * weight(y); }, "outer piece");
    return 2.0 * (inner + outer) / den;
}

Example25Report run_example_2_5(const std::vector<double>& epsilons, double q, double T,
                                double dt, std::uint64_t base_seed, const TamingSpec& taming,
                                const ExecPolicy& exec) {
    if (epsilons.empty()) throw std::invalid_argument("example25: no epsilon values");
    Example25Report report;
    report.q = q;
    report.T = T;
    report.dt = dt;

    ScalarField B;
    B.dim = 2;
    B.kind = "example25_B";
    B.eval = [q](const double* x) {
        const double y = x[1];
        return y == 0.0 ? 0.0 : std::pow(std::fabs(y), -q);
    };

    const auto n_steps = static_cast<std::int64_t>(std::llround(T / dt));
    TimeGrid grid(0.0, dt, n_steps);

    report.entries.resize(epsilons.size());
    parallel_for_index(static_cast<int>(epsilons.size()), exec, [&](int ei) {
        const double eps = epsilons[ei];
        SdeModel model;
        model.dim = 2;
        model.drift_b1 = make_example25_drift(q);
        model.drift_b2 = make_zero_field(2);
        model.diffusion = make_scalar_diffusion(2, eps);
        model.k1 = eps * eps;
        model.k2 = eps * eps;
        model.p = 4.5; // inside (4, 1/q) for the studied q
        model.rho = 4.5;

        IntegrateOptions opts;
        opts.occupation = &B;
        opts.exec = exec;

        NoisePath noise(derive_seed(base_seed, "example25", ei), 2, grid);
        std::vector<double> x0{0.0, 0.0};
        auto rec = integrate_flow(model, x0, noise, grid, taming, opts);

        Example25Entry entry;
        entry.epsilon = eps;
        entry.empirical = rec.occupation_segments[0][0] / rec.occupation_dt[0][0];
        entry.oracle = example25_stationary_mean(eps, q);
        entry.relative_deviation =
            std::fabs(entry.empirical - entry.oracle) / std::fabs(entry.oracle);
        entry.end_x_over_t = rec.final_positions[0] / T;
        entry.singular_hits = rec.singular_hits;
        report.entries[ei] = entry;
    });

    bool increasing = true;
    for (std::size_t i = 1; i < report.entries.size(); ++i) {
        if (report.entries[i].epsilon < report.entries[i - 1].epsilon) {
            if (!(report.entries[i].empirical > report.entries[i - 1].empirical))
                increasing = false;
        }
    }
    report.averages_increase_as_eps_drops = increasing;
    return report;
}

BoundedCaseReport run_bounded_case_study(const SdeModel& model, double b_sup, double b1_sup,
                                         double b2_sup, double grad_sigma_sup, double epsilon,
                                         double cal_c1, double cal_c2, double T, double dt,
                                         int replicas, int mesh_resolution,
                                         std::uint64_t base_seed, const ExecPolicy& exec) {
    ModelNorms n;
    n.d = model.dim;
    n.p = model.p;
    n.rho = model.rho;
    n.k1 = model.k1;
    n.k2 = model.k2;
    const auto cs = bounded_case_study(n, b_sup, b1_sup, b2_sup, grad_sigma_sup, epsilon,
                                       cal_c1, cal_c2);
    BoundedCaseReport rep;
    rep.kappa_bound = cs.kappa_bound;
    rep.beta_threshold = cs.beta_threshold;
    rep.epsilon = epsilon;
    auto disp = measure_dispersion(model, 1.0, mesh_resolution, T, dt, replicas, base_seed, 0,
                                   TamingSpec{}, exec);
    rep.measured_kappa_mean = disp.kappa_mean;
    rep.measured_kappa_q90 = disp.kappa_q90;
    rep.needed_calibration = cs.kappa_bound > 0.0 ? disp.kappa_mean / (cs.kappa_bound / cal_c1)
                                                  : 0.0;
    rep.measured_within_bound = disp.kappa_mean <= cs.kappa_bound;
    return rep;
}

} // namespace sdeflow
