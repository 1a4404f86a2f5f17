// Command-line front end: declarative scenario configs, subcommand dispatch,
// reproducible seeds, CSV/JSON/SVG emission.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>

#include "sdeflow/attractor.hpp"
#include "sdeflow/config.hpp"
#include "sdeflow/constants.hpp"
#include "sdeflow/dispersion.hpp"
#include "sdeflow/elliptic.hpp"
#include "sdeflow/io.hpp"
#include "sdeflow/krylov.hpp"
#include "sdeflow/rng.hpp"
#include "sdeflow/scenarios.hpp"
#include "sdeflow/simulate.hpp"
#include "sdeflow/svg.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using nlohmann::json;
using namespace sdeflow;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    std::optional<std::string> format;
    bool emit_svg = false;
};

ScenarioConfig load(const CommonArgs& args) {
    ScenarioConfig cfg = load_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.out_dir) cfg.out_dir = *args.out_dir;
    if (args.threads) cfg.threads = *args.threads;
    if (args.format) cfg.format = *args.format;
    std::filesystem::create_directories(cfg.out_dir);
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
    return cfg;
}

ExecPolicy exec_of(const ScenarioConfig& cfg) { return ExecPolicy{cfg.threads}; }

void require_param_keys(const json& p, std::initializer_list<const char*> allowed,
                        const char* sub) {
    for (auto it = p.begin(); it != p.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok)
            throw std::invalid_argument(std::string(sub) + " params: unknown key '" + it.key() +
                                        "'");
    }
}

TamingSpec taming_of(const json& p) {
    TamingSpec t;
    const std::string kind = p.value("taming", std::string("norm_clip"));
    if (kind == "none") t.kind = TamingSpec::Kind::none;
    else if (kind == "norm_clip") t.kind = TamingSpec::Kind::norm_clip;
    else if (kind == "soft") t.kind = TamingSpec::Kind::soft;
    else throw std::invalid_argument("unknown taming scheme '" + kind + "'");
    return t;
}

void emit(const ScenarioConfig& cfg, const std::string& name, const std::string& bytes) {
    atomic_write_file(cfg.out_dir + "/" + name, bytes);
}

// data tables go out as CSV or as a JSON array, per --format
void emit_table(const ScenarioConfig& cfg, const std::string& stem, const std::string& csv,
                const json& rows) {
    if (cfg.format == "json")
        emit(cfg, stem + ".json", rows.dump(2) + "\n");
    else
        emit(cfg, stem + ".csv", csv);
}

void print_and_store(const ScenarioConfig& cfg, const std::string& name, const json& j) {
    const std::string text = j.dump(2) + "\n";
    emit(cfg, name, text);
    std::cout << text;
}

int run_simulate_flow(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"initials", "T", "dt", "stride", "taming", "binary"}, "simulate-flow");
    const double T = p.at("T").get<double>();
    const double dt = p.at("dt").get<double>();
    std::vector<double> initials;
    for (const auto& pt : p.at("initials"))
        for (const auto& c : pt) initials.push_back(c.get<double>());
    TimeGrid grid(0.0, dt, static_cast<std::int64_t>(std::llround(T / dt)));
    NoisePath noise(derive_seed(cfg.seed, "simulate-flow", 0), cfg.model.dim, grid);
    IntegrateOptions opts;
    opts.snapshot_stride = p.value("stride", std::int64_t{1});
    opts.exec = exec_of(cfg);
    auto rec = integrate_flow(cfg.model, initials, noise, grid, taming_of(p), opts);
    json traj = json::array();
    if (cfg.format == "json")
        for (std::size_t s = 0; s < rec.snapshots.size(); ++s)
            traj.push_back({{"t", rec.snapshot_times[s]}, {"positions", rec.snapshots[s]}});
    emit_table(cfg, "trajectory", trajectory_csv(rec), traj);
    if (p.value("binary", false)) write_trajectory_binary(cfg.out_dir + "/trajectory.bin", rec);
    json out{{"subcommand", "simulate-flow"},
             {"seed", cfg.seed},
             {"members", rec.n_members},
             {"steps", grid.n_steps},
             {"diverged", rec.n_diverged()},
             {"singular_hits", rec.singular_hits},
             {"sup_norm_overall", rec.running_ensemble_sup}};
    print_and_store(cfg, "simulate-flow.json", out);
    return 0;
}

int run_dispersion(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"radius", "mesh", "T", "dt", "replicas", "stride", "taming"},
                       "dispersion");
    auto rep = measure_dispersion(cfg.model, p.value("radius", 1.0), p.value("mesh", 32),
                                  p.at("T").get<double>(), p.at("dt").get<double>(),
                                  p.value("replicas", 100), cfg.seed,
                                  p.value("stride", std::int64_t{0}), taming_of(p), exec_of(cfg));
    json rows = json::array();
    if (cfg.format == "json")
        for (std::size_t r = 0; r < rep.sup_norm.size(); ++r)
            for (std::size_t i = 0; i < rep.times.size(); ++i)
                rows.push_back({{"replica", r},
                                {"t", rep.times[i]},
                                {"sup_norm", rep.sup_norm[r][i]},
                                {"diameter", rep.diameter[r][i]}});
    emit_table(cfg, "dispersion_data", dispersion_csv(rep), rows);
    json out{{"subcommand", "dispersion"},
             {"seed", cfg.seed},
             {"replicas", rep.replicas},
             {"mesh_resolution", rep.mesh_resolution},
             {"kappa_hat_mean", rep.kappa_mean},
             {"kappa_hat_q10", rep.kappa_q10},
             {"kappa_hat_q50", rep.kappa_q50},
             {"kappa_hat_q90", rep.kappa_q90}};
    if (args.emit_svg) {
        std::vector<PlotSeries> series;
        PlotSeries mean_sup{"mean sup |psi_t|", rep.times, {}};
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            double acc = 0.0;
            for (const auto& row : rep.sup_norm) acc += row[i];
            mean_sup.y.push_back(acc / rep.sup_norm.size());
        }
        series.push_back(mean_sup);
        emit(cfg, "dispersion.svg",
             svg_line_plot(series, "dispersion", "t", "sup norm", cfg.seed));
    }
    print_and_store(cfg, "dispersion.json", out);
    return 0;
}

int run_two_point(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"x", "y", "r", "T", "dt", "replicas", "taming", "fit_alpha"},
                       "two-point");
    std::vector<double> x = p.at("x").get<std::vector<double>>();
    std::vector<double> y = p.at("y").get<std::vector<double>>();
    std::vector<double> rs = p.at("r").get<std::vector<double>>();
    std::vector<double> Ts = p.at("T").get<std::vector<double>>();
    const double dt = p.at("dt").get<double>();
    const int replicas = p.value("replicas", 200);

    CsvWriter csv({"r", "T", "sup_moment", "sup_se", "end_moment", "end_se", "excluded"});
    std::vector<MomentRow> table;
    json rows = json::array();
    for (double r : rs)
        for (double T : Ts) {
            auto res = two_point_moment(cfg.model, x, y, r, T, dt, replicas, cfg.seed,
                                        taming_of(p), exec_of(cfg));
            csv.row_values({r, T, res.sup_moment, res.sup_moment_se, res.end_moment,
                            res.end_moment_se, double(res.excluded)});
            if (cfg.format == "json")
                rows.push_back({{"r", r},
                                {"T", T},
                                {"sup_moment", res.sup_moment},
                                {"sup_se", res.sup_moment_se},
                                {"end_moment", res.end_moment},
                                {"end_se", res.end_moment_se},
                                {"excluded", res.excluded}});
            table.push_back({r, T, res.sup_moment});
        }
    emit_table(cfg, "two-point_data", csv.data, rows);
    json out{{"subcommand", "two-point"}, {"seed", cfg.seed}, {"replicas", replicas}};
    if (rs.size() >= 2 && Ts.size() >= 3) {
        double sep = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) sep += (x[i] - y[i]) * (x[i] - y[i]);
        auto fit = fit_c1_alpha(table, p.value("fit_alpha", 3.0), std::sqrt(sep));
        out["fit"] = {{"c_hat", fit.c_hat},
                      {"c1_hat", fit.c1_hat},
                      {"max_abs_residual", fit.max_abs_residual}};
    }
    print_and_store(cfg, "two-point.json", out);
    return 0;
}

int run_constants(const CommonArgs& args) {
    auto cfg = load(args);
    require_param_keys(cfg.subcommand_params, {}, "constants");
    auto bundle = make_constant_bundle(cfg.norms(), cfg.calibration);
    print_and_store(cfg, "constants.json", bundle_to_json(bundle));
    return 0;
}

int run_krylov_check(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"f", "q", "norm_f", "windows", "x0", "dt", "replicas", "taming"},
                       "krylov-check");
    OccupationFunctional functional;
    functional.f = scalar_field_from_json(cfg.model.dim, p.at("f"));
    functional.q = p.at("q").get<double>();
    functional.norm_f = p.at("norm_f").get<double>();
    std::vector<std::pair<double, double>> windows;
    for (const auto& w : p.at("windows"))
        windows.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
    std::vector<double> x0 = p.value("x0", std::vector<double>(cfg.model.dim, 0.0));
    auto rep = verify_krylov(cfg.model, functional, windows, x0, p.at("dt").get<double>(),
                             p.value("replicas", 1000), cfg.seed, cfg.calibration, taming_of(p),
                             exec_of(cfg));
    json jw = json::array();
    for (const auto& w : rep.windows)
        jw.push_back({{"s", w.s},
                      {"t", w.t},
                      {"empirical", w.empirical},
                      {"se", w.se},
                      {"bound", w.bound},
                      {"c_hat", w.c_hat},
                      {"flagged", w.flagged}});
    json out{{"subcommand", "krylov-check"},
             {"seed", cfg.seed},
             {"gamma", rep.gamma},
             {"replicas", rep.replicas},
             {"diverged", rep.diverged},
             {"c_hat", rep.c_hat},
             {"conditional_at_zero_only", rep.conditional_at_zero_only},
             {"windows", jw}};
    print_and_store(cfg, "krylov-check.json", out);
    return 0;
}

int run_khasminskii_check(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"f", "q", "norm_f", "lambda", "T", "dt", "replicas", "taming"},
                       "khasminskii-check");
    OccupationFunctional functional;
    functional.f = scalar_field_from_json(cfg.model.dim, p.at("f"));
    functional.q = p.at("q").get<double>();
    functional.norm_f = p.at("norm_f").get<double>();
    auto rep = verify_khasminskii(cfg.model, functional, p.at("lambda").get<double>(),
                                  p.at("T").get<double>(), p.at("dt").get<double>(),
                                  p.value("replicas", 1000), cfg.seed, cfg.calibration,
                                  taming_of(p), exec_of(cfg));
    json out{{"subcommand", "khasminskii-check"},
             {"seed", cfg.seed},
             {"empirical", rep.empirical},
             {"se", rep.se},
             {"kappa", rep.kappa},
             {"bound", rep.bound},
             {"pass", rep.pass},
             {"lower_bound_only", rep.lower_bound_only},
             {"overflow_count", rep.overflow_count},
             {"replicas", rep.replicas}};
    print_and_store(cfg, "khasminskii-check.json", out);
    return 0;
}

int run_zvonkin(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"lambda", "radius", "h"}, "zvonkin-solve");
    const double lambda = p.at("lambda").get<double>();
    auto z = zvonkin_transform(cfg.model, lambda, p.value("radius", 8.0), p.at("h").get<double>());
    for (int l = 0; l < z.dims; ++l) {
        emit(cfg, "zvonkin_u" + std::to_string(l) + ".csv", grid_csv(z.U[l]));
        write_grid_binary(cfg.out_dir + "/zvonkin_u" + std::to_string(l) + ".bin", z.U[l]);
    }
    json out{{"subcommand", "zvonkin-solve"},
             {"lambda", z.lambda},
             {"certified", z.certified},
             {"sup_U", z.sup_U},
             {"sup_gradU", z.sup_gradU},
             {"psi_max_residual", z.psi_max_residual},
             {"tilde_k1", z.tilde_k1},
             {"tilde_k2", z.tilde_k2},
             {"ellipticity_min", z.ellipticity_min},
             {"ellipticity_max", z.ellipticity_max},
             {"sup_b_tilde", z.sup_b_tilde},
             {"sup_grad_b_tilde", z.sup_grad_b_tilde}};
    print_and_store(cfg, "zvonkin-certificate.json", out);
    return 0;
}

int run_pde_scaling(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"lambdas", "p", "p_prime", "radius", "h", "f"}, "pde-scaling");
    EllipticProblem prob;
    prob.dims = cfg.model.dim;
    const int d = cfg.model.dim;
    const SdeModel& model = cfg.model;
    prob.a = make_function_diffusion(
        d,
        [&model, d](const double* x, double* out) {
            std::vector<double> s(d * d);
            model.diffusion.eval(x, s.data());
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double acc = 0.0;
                    for (int k = 0; k < d; ++k) acc += s[i * d + k] * s[j * d + k];
                    out[i * d + j] = acc;
                }
        },
        "sigma_sigma_T");
    prob.b.dim = d;
    prob.b.eval = [&model](const double* x, double* out) { model.drift(x, out); };
    prob.f = scalar_field_from_json(d, p.at("f"));
    prob.domain_radius = p.value("radius", 8.0);
    prob.h = p.at("h").get<double>();
    const double pp = p.value("p", std::numeric_limits<double>::infinity());
    const double ppr = p.value("p_prime", std::numeric_limits<double>::infinity());
    auto rep = verify_apriori(prob, p.at("lambdas").get<std::vector<double>>(), pp, ppr);
    json out{{"subcommand", "pde-scaling"},
             {"lambdas", rep.lambdas},
             {"u_norm", rep.u_norm},
             {"grad_norm", rep.grad_norm},
             {"slope_u", rep.slope_u},
             {"slope_grad", rep.slope_grad},
             {"paper_slope_u", rep.paper_slope_u},
             {"paper_slope_grad", rep.paper_slope_grad},
             {"pass_u", rep.pass_u},
             {"pass_grad", rep.pass_grad}};
    if (args.emit_svg) {
        std::vector<PlotSeries> series{{"|u|", rep.lambdas, rep.u_norm},
                                       {"|grad u|", rep.lambdas, rep.grad_norm}};
        emit(cfg, "pde-scaling.svg",
             svg_line_plot(series, "resolvent scaling", "lambda", "norm", cfg.seed, true, true));
    }
    print_and_store(cfg, "pde-scaling.json", out);
    return 0;
}

int run_attractor_pullback(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"gamma", "r", "horizon", "depths", "mesh", "replicas", "dt", "taming"},
                       "attractor-pullback");
    AbsorptionScenario sc;
    sc.gamma = p.value("gamma", 0.0);
    sc.r = p.at("r").get<double>();
    sc.horizon = p.at("horizon").get<double>();
    sc.depths = p.at("depths").get<std::vector<double>>();
    sc.mesh_resolution = p.value("mesh", 16);
    sc.replicas = p.value("replicas", 200);
    sc.dt = p.at("dt").get<double>();
    double beta_adv = 0.0, beta0_adv = 0.0;
    if (!std::isnan(cfg.model.norm_b) && !std::isnan(cfg.model.norm_grad_sigma)) {
        auto norms = cfg.norms();
        beta0_adv = beta_zero(norms.k1, norms.k2, norms.norm_b1,
                              gamma_section6(norms, cfg.calibration));
        auto bs = beta_star(cfg.model, std::max(1.0, sc.r), std::max(2.0, 4.0 * sc.r), 4096);
        beta_adv = bs.value;
    }
    auto rep = pullback_absorption(cfg.model, sc, cfg.seed, taming_of(p), exec_of(cfg), beta_adv,
                                   beta0_adv);
    std::string flags;
    for (char f : rep.flags) flags += f ? '1' : '0';
    // candidate r0 with beta^*(r0) <= 0, reported without a sufficiency claim
    const double r0 = candidate_r0(cfg.model, 1.0, std::max(16.0, 4.0 * sc.r),
                                   std::max(32.0, 8.0 * sc.r), 2048);
    json out{{"subcommand", "attractor-pullback"},
             {"seed", cfg.seed},
             {"replicas", rep.replicas},
             {"passes", rep.passes},
             {"probability", rep.probability},
             {"ci_low", rep.ci_low},
             {"ci_high", rep.ci_high},
             {"beta_margin", rep.beta_margin},
             {"candidate_r0", r0},
             {"per_replica_flags", flags},
             {"notes", rep.notes}};
    print_and_store(cfg, "attractor-pullback.json", out);
    return 0;
}

int run_expansion_forward(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"gamma", "r", "horizon", "times", "mesh", "replicas", "dt", "taming"},
                       "expansion-forward");
    auto rep = forward_expansion(cfg.model, p.at("r").get<double>(), p.value("gamma", 0.0),
                                 p.at("horizon").get<double>(),
                                 p.at("times").get<std::vector<double>>(), p.value("mesh", 32),
                                 p.value("replicas", 200), p.at("dt").get<double>(), cfg.seed,
                                 taming_of(p), exec_of(cfg));
    json out{{"subcommand", "expansion-forward"},
             {"seed", cfg.seed},
             {"replicas", rep.replicas},
             {"probability", rep.probability},
             {"origin_witness_probability", rep.origin_witness_probability},
             {"ci_low", rep.ci_low},
             {"ci_high", rep.ci_high},
             {"proxy", rep.proxy}};
    print_and_store(cfg, "expansion-forward.json", out);
    return 0;
}

int run_lemma61(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p,
                       {"case", "T", "r", "r1", "r2", "R", "delta", "delta1", "beta_star",
                        "beta_lower", "norm_b1", "replicas", "dt", "taming", "matrix", "depths",
                        "horizon", "r_grid", "R_grid", "mesh"},
                       "lemma61");
    if (p.value("matrix", false)) {
        auto m = criterion_matrix(cfg.model, p.at("r_grid").get<std::vector<double>>(),
                                  p.at("R_grid").get<std::vector<double>>(),
                                  p.at("horizon").get<double>(),
                                  p.at("depths").get<std::vector<double>>(), p.value("mesh", 16),
                                  p.value("replicas", 100), p.at("dt").get<double>(), cfg.seed,
                                  taming_of(p), exec_of(cfg));
        json rows = json::array();
        if (cfg.format == "json")
            for (std::size_t ri = 0; ri < m.r_grid.size(); ++ri)
                for (std::size_t Ri = 0; Ri < m.R_grid.size(); ++Ri)
                    rows.push_back({{"r", m.r_grid[ri]},
                                    {"R", m.R_grid[Ri]},
                                    {"probability", m.probability[ri][Ri]}});
        emit_table(cfg, "criterion-matrix_data", criterion_matrix_csv(m), rows);
        if (args.emit_svg)
            emit(cfg, "criterion-matrix.svg",
                 svg_heatmap(m.r_grid, m.R_grid, m.probability, "pullback containment", "r", "R",
                             cfg.seed));
        json out{{"subcommand", "lemma61"},
                 {"matrix", true},
                 {"seed", cfg.seed},
                 {"replicas", m.replicas}};
        print_and_store(cfg, "criterion-matrix.json", out);
        return 0;
    }

    Lemma61Params lp;
    lp.T = p.value("T", 1.0);
    lp.r = p.value("r", 1.0);
    lp.r1 = p.value("r1", 0.0);
    lp.r2 = p.value("r2", 0.0);
    lp.R = p.value("R", 0.0);
    lp.delta = p.value("delta", 0.0);
    lp.delta1 = p.value("delta1", 0.0);
    lp.k1 = cfg.model.k1;
    lp.k2 = cfg.model.k2;
    lp.norm_b1 = p.value("norm_b1", std::isnan(cfg.model.norm_b1) ? 0.0 : cfg.model.norm_b1);
    const int case_id = p.at("case").get<int>();
    if (p.contains("beta_star")) lp.beta_star = p.at("beta_star").get<double>();
    else lp.beta_star = beta_star(cfg.model, lp.r, 8.0 * lp.r, 4096).value;
    if (p.contains("beta_lower")) lp.beta_lower = p.at("beta_lower").get<double>();
    else lp.beta_lower = beta_lower(cfg.model, lp.r, 8.0 * lp.r, 4096).value;
    if (!std::isnan(cfg.model.norm_b) && !std::isnan(cfg.model.norm_grad_sigma))
        lp.gamma_factor = gamma_section6(cfg.norms(), cfg.calibration);

    auto bound = lemma61_bound(case_id, lp);
    json out{{"subcommand", "lemma61"},
             {"case", case_id},
             {"bound", bound.value},
             {"vacuous", bound.vacuous},
             {"girsanov_exponent", bound.girsanov_exponent}};
    const int replicas = p.value("replicas", 0);
    if (replicas > 0) {
        auto fal = lemma61_falsify(cfg.model, case_id, lp, replicas, p.at("dt").get<double>(),
                                   cfg.seed, taming_of(p), exec_of(cfg));
        out["empirical"] = fal.empirical;
        out["se"] = fal.se;
        out["violation"] = fal.violation;
        out["event"] = fal.event;
        out["replicas"] = replicas;
        out["seed"] = cfg.seed;
    }
    print_and_store(cfg, "lemma61.json", out);
    return 0;
}

int run_example25(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p, {"epsilons", "q", "T", "dt", "taming"}, "example-2-5");
    auto rep = run_example_2_5(p.at("epsilons").get<std::vector<double>>(),
                               p.at("q").get<double>(), p.at("T").get<double>(),
                               p.at("dt").get<double>(), cfg.seed, taming_of(p), exec_of(cfg));
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back({{"epsilon", e.epsilon},
                           {"empirical", e.empirical},
                           {"oracle", e.oracle},
                           {"relative_deviation", e.relative_deviation},
                           {"end_x_over_t", e.end_x_over_t},
                           {"singular_hits", e.singular_hits}});
    json out{{"subcommand", "example-2-5"},
             {"seed", cfg.seed},
             {"q", rep.q},
             {"T", rep.T},
             {"dt", rep.dt},
             {"entries", entries},
             {"averages_increase_as_eps_drops", rep.averages_increase_as_eps_drops}};
    print_and_store(cfg, "example-2-5.json", out);
    return 0;
}

int run_case_study(const CommonArgs& args) {
    auto cfg = load(args);
    const json& p = cfg.subcommand_params;
    require_param_keys(p,
                       {"b_sup", "b1_sup", "b2_sup", "grad_sigma_sup", "epsilon", "c1", "c2", "T",
                        "dt", "replicas", "mesh"},
                       "case-study-bounded");
    auto rep = run_bounded_case_study(
        cfg.model, p.value("b_sup", 0.0), p.value("b1_sup", 0.0), p.value("b2_sup", 0.0),
        p.value("grad_sigma_sup", 0.0), p.at("epsilon").get<double>(), p.value("c1", 1.0),
        p.value("c2", 1.0), p.value("T", 50.0), p.value("dt", 1e-2), p.value("replicas", 100),
        p.value("mesh", 16), cfg.seed, exec_of(cfg));
    json out{{"subcommand", "case-study-bounded"},
             {"seed", cfg.seed},
             {"kappa_bound", rep.kappa_bound},
             {"beta_threshold", rep.beta_threshold},
             {"epsilon", rep.epsilon},
             {"measured_kappa_mean", rep.measured_kappa_mean},
             {"measured_kappa_q90", rep.measured_kappa_q90},
             {"needed_calibration", rep.needed_calibration},
             {"measured_within_bound", rep.measured_within_bound}};
    print_and_store(cfg, "case-study-bounded.json", out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic-flow simulation and verification laboratory for singular SDEs"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "scenario config (JSON)")->required();
        sub->add_option("--seed", [&args](const std::vector<std::string>& v) {
            args.seed = std::stoull(v.front());
            return true;
        }, "base seed override");
        sub->add_option("--out", [&args](const std::vector<std::string>& v) {
            args.out_dir = v.front();
            return true;
        }, "output directory");
        sub->add_option("--threads", [&args](const std::vector<std::string>& v) {
            args.threads = std::stoi(v.front());
            return true;
        }, "thread count (0 = serial reference)");
        sub->add_option("--format", [&args](const std::vector<std::string>& v) {
            args.format = v.front();
            return true;
        }, "csv|json");
        sub->add_flag("--svg", args.emit_svg, "emit SVG plots");
    };

    std::map<std::string, std::function<int(const CommonArgs&)>> handlers{
        {"simulate-flow", run_simulate_flow},
        {"dispersion", run_dispersion},
        {"two-point", run_two_point},
        {"constants", run_constants},
        {"krylov-check", run_krylov_check},
        {"khasminskii-check", run_khasminskii_check},
        {"zvonkin-solve", run_zvonkin},
        {"pde-scaling", run_pde_scaling},
        {"attractor-pullback", run_attractor_pullback},
        {"expansion-forward", run_expansion_forward},
        {"lemma61", run_lemma61},
        {"example-2-5", run_example25},
        {"case-study-bounded", run_case_study},
    };
    for (auto& [name, fn] : handlers) add_common(app.add_subcommand(name));

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto& [name, fn] : handlers)
            if (app.get_subcommand(name)->parsed()) return fn(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "no subcommand\n";
    return 1;
}
