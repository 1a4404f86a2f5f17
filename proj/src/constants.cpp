#include "sdeflow/constants.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace sdeflow {

namespace {

double denom(double x, const char* what) {
    if (!(x > 0.0)) throw std::invalid_argument(std::string("nonpositive exponent denominator: ") + what);
    return x;
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

} // namespace

double gamma_factor(double k1, double k2, double norm_grad_sigma, double norm_b, double p,
                    double rho, int d) {
    require_positive(k1, "K1");
    const double er = denom(1.0 - d / rho, "1 - d/rho");
    const double ep = denom(1.0 - d / p, "1 - d/p");
    return std::pow(k2 / k1, 4.0 * d * d / er) +
           std::pow(norm_grad_sigma * norm_grad_sigma / k1, 4.0 * d * d / er) +
           std::pow(norm_b / k1, 4.0 * d / ep);
}

double gamma_prime(double k1, double k2, double norm_grad_sigma, double rho, int d) {
    require_positive(k1, "K1");
    const double er = denom(1.0 - d / rho, "1 - d/rho");
    return std::pow(k2 / k1, 4.0 * d * d / er) +
           std::pow(norm_grad_sigma * norm_grad_sigma / k1, 4.0 * d * d / er);
}

double gamma_section6(const ModelNorms& n, const CalibrationSet& cal) {
    return cal.c_kry(n.p / 2.0) *
           gamma_factor(n.k1, n.k2, n.norm_grad_sigma, n.norm_b2, n.p, n.rho, n.d);
}

double kappa_star(const ModelNorms& n, const CalibrationSet& cal) {
    const double pmin = std::min(n.p, n.rho);
    const double em = denom(1.0 - n.d / pmin, "1 - d/(p^rho)");
    const double er = denom(1.0 - n.d / n.rho, "1 - d/rho");
    const int d = n.d;
    const double prefactor =
        n.k2 + n.norm_b * n.norm_b * n.k2 / (n.k1 * n.k1) + n.norm_grad_sigma * n.norm_grad_sigma;
    const double bracket =
        std::pow(n.k2 / n.k1, 16.0 * d * d * d / (em * er)) +
        std::pow(n.norm_b / n.k1, 32.0 * d * d / em) +
        std::pow(n.norm_grad_sigma * n.norm_grad_sigma / n.k1, 32.0 * d * d * d / (em * er));
    return cal.c_prd * prefactor * bracket;
}

double beta_zero(double k1, double k2, double norm_b1, double gamma) {
    if (!(k1 * k2 > 0.0)) throw std::invalid_argument("beta_zero: K1*K2 must be > 0");
    if (gamma < 0.0) throw std::invalid_argument("beta_zero: Gamma must be >= 0");
    return 4.0 * (norm_b1 * norm_b1 * gamma + k2 * norm_b1 * std::sqrt(gamma)) /
           std::sqrt(k1 * k2);
}

double lambda_zvonkin(const ModelNorms& n, const CalibrationSet& cal) {
    const double er = denom(1.0 - n.d / n.rho, "1 - d/rho");
    const double ep = denom(1.0 - n.d / n.p, "1 - d/p");
    const double base = (n.k1 + std::sqrt(n.k2) * n.norm_grad_sigma) / n.k1;
    return cal.c1_star * n.k1 *
           (n.k2 * n.k2 / (n.k1 * n.k1) * std::pow(base, 2.0 / er) +
            std::pow(base, 2.0 * n.d / (er * ep)) * std::pow(n.norm_b / n.k1, 2.0 / ep));
}

double omega_holder_proxy(const ModelNorms& n, const CalibrationSet& cal) {
    return cal.c_holder * std::sqrt(n.k2) * n.norm_grad_sigma;
}

TransformedNormBounds transformed_bounds(const ModelNorms& n, const CalibrationSet& cal,
                                         double lambda) {
    const double er = denom(1.0 - n.d / n.rho, "1 - d/rho");
    const double d = n.d;
    const double omega = omega_holder_proxy(n, cal);
    const double hol = std::pow(1.0 + omega / n.k1, d / er);

    TransformedNormBounds t;
    t.tilde_k1 = n.k1 / 4.0;
    t.tilde_k2 = 9.0 * n.k2 / 4.0;
    t.sigma_inf = 1.5 * n.sigma_sup;

    // resolvent bounds for the corrector U (f = b), each capped by the
    // half-bounds that certify the transform
    const double u_inf = std::pow(lambda, -(2.0 - d / n.p) / 2.0) *
                         std::pow(n.k1, -d / (2.0 * n.p)) * hol * n.norm_b;
    const double u_lp = hol * n.norm_b / lambda;
    const double grad_u_lp = hol * n.norm_b / std::sqrt(lambda * n.k1);

    t.b_inf = lambda * std::min(0.5, u_inf);
    t.b_lp = lambda * std::min(0.5 * std::pow(n.k1 / lambda, (1.0 - d / n.p) / 2.0), u_lp);
    t.grad_b_lp = lambda * std::pow(1.5, d / n.p) *
                  std::min(0.5 * std::pow(n.k1 / lambda, d / (2.0 * n.p)), grad_u_lp);
    t.grad_sigma_lp = 9.0 * cal.c2_star * std::sqrt(n.k2) / n.k1 *
                          std::pow(1.0 + std::sqrt(n.k2) * n.norm_grad_sigma / n.k1, d / er) *
                          n.norm_b +
                      9.0 * n.norm_grad_sigma;
    return t;
}

double gamma_tilde(const ModelNorms& n, const CalibrationSet& cal) {
    const double pmin = std::min(n.p, n.rho);
    const double em = denom(1.0 - n.d / pmin, "1 - d/(p^rho)");
    const double ep = denom(1.0 - n.d / n.p, "1 - d/p");
    const double lambda = lambda_zvonkin(n, cal);
    const TransformedNormBounds t = transformed_bounds(n, cal, lambda);
    const int d = n.d;
    return std::pow(t.tilde_k2 / t.tilde_k1, 4.0 * d * d / em) +
           std::pow(t.grad_sigma_lp * t.grad_sigma_lp / t.tilde_k1, 4.0 * d * d / em) +
           std::pow(t.b_lp / t.tilde_k1, 4.0 * d / ep);
}

double varrho(double r, const VarrhoInputs& in, bool lipschitz_variant, double L) {
    if (!(r >= 1.0)) throw std::invalid_argument("varrho: need r >= 1");
    if (!(in.tilde_k2 > 0.0)) throw std::invalid_argument("varrho: tilde K2 must be > 0");
    if (lipschitz_variant) {
        const double bracket = in.b_inf +
                               std::pow(in.gamma_tilde * in.grad_b_lp, 2.0) / in.tilde_k2 +
                               in.gamma_tilde * in.grad_b_lp + L * L;
        return r * r * bracket;
    }
    const double gs2 = in.grad_sigma_lp * in.grad_sigma_lp;
    const double bracket = in.b_inf + in.sigma_inf * in.sigma_inf +
                           std::pow(in.gamma_tilde * in.grad_b_lp, 2.0) / in.tilde_k2 +
                           in.gamma_tilde * in.grad_b_lp +
                           in.gamma_tilde * in.gamma_tilde * gs2 * gs2 / in.tilde_k2 +
                           in.gamma_tilde * gs2;
    return r * r * r * r * bracket;
}

CBundle c_bundle(const ModelNorms& n, const CalibrationSet& cal) {
    if (!(n.sigma_sup > 0.0)) throw std::invalid_argument("c_bundle: |sigma|_inf must be > 0");
    const double lambda = lambda_zvonkin(n, cal);
    const double gt = gamma_tilde(n, cal);
    const double gp = gamma_prime(n.k1, n.k2, n.norm_grad_sigma, n.rho, n.d);
    const double mixed =
        n.k2 * n.norm_b * n.norm_b / (n.k1 * n.k1) + n.norm_grad_sigma * n.norm_grad_sigma;
    CBundle c;
    c.c1 = lambda + n.k2 + gt * lambda + std::pow(gt * lambda, 2.0) / n.k2 +
           gt * gt * mixed * mixed / n.k2 + gt * mixed;
    c.c2 = 1.0 / (4.0 * n.sigma_sup * n.sigma_sup);
    c.c3 = cal.c_c3 * (gp * gp * std::pow(n.norm_b, 4.0) / (n.k1 * n.k1 * n.k2) +
                       gp * n.norm_b * n.norm_b / n.k1);
    c.alpha = 3.0;
    return c;
}

double lambda_min_pde(double k1, double k2, double omega_alpha, double alpha_holder,
                      double norm_b, double p1, int d, const CalibrationSet& cal) {
    require_positive(k1, "K1");
    if (!(alpha_holder > 0.0) || alpha_holder > 1.0)
        throw std::invalid_argument("lambda_min_pde: alpha must be in (0,1]");
    if (!(p1 > d)) throw std::invalid_argument("lambda_min_pde: need p1 > d");
    const double ep = denom(1.0 - d / p1, "1 - d/p1");
    const double base = (k1 + omega_alpha) / k1;
    return cal.c0_pde * k1 *
           (k2 * k2 / (k1 * k1) * std::pow(base, 2.0 / alpha_holder) +
            std::pow(base, (d / alpha_holder) * (2.0 / ep)) *
                std::pow(norm_b / k1, 2.0 / ep));
}

double krylov_bound(double gamma, double k2, double window, double norm_f, double q,
                    const CalibrationSet& cal) {
    if (window < 0.0) throw std::invalid_argument("krylov_bound: window must be >= 0");
    return cal.c_kry(q) * gamma * (std::sqrt(window) / std::sqrt(k2) + window) * norm_f;
}

KhasminskiiBound khasminskii_bound(double gamma, double k2, double lambda, double T,
                                   double norm_f, double q, const CalibrationSet& cal) {
    if (!(lambda > 0.0)) throw std::invalid_argument("khasminskii_bound: lambda must be > 0");
    if (!(T > 0.0)) throw std::invalid_argument("khasminskii_bound: T must be > 0");
    KhasminskiiBound b;
    b.kappa = 2.0 * cal.c_kry(q) * lambda * gamma * norm_f;
    b.bound = 2.0 * std::pow(2.0, T * (b.kappa * b.kappa / k2 + 2.0 * b.kappa));
    return b;
}

BoundedCaseStudy bounded_case_study(const ModelNorms& n, double b_sup, double b1_sup,
                                    double b2_sup, double grad_sigma_sup, double epsilon,
                                    double cal_c1, double cal_c2) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("bounded_case_study: epsilon must be > 0");
    const int d = n.d;
    BoundedCaseStudy r;
    r.epsilon = epsilon;
    const double prefactor =
        n.k2 + b_sup * b_sup * n.k2 / (n.k1 * n.k1) + grad_sigma_sup * grad_sigma_sup;
    const double bracket =
        std::pow(n.k2 / n.k1, 16.0 * d * d * d + epsilon) +
        std::pow(grad_sigma_sup * grad_sigma_sup / n.k1, 32.0 * d * d * d + epsilon) +
        std::pow(b_sup / n.k1, 32.0 * d * d + epsilon);
    r.kappa_bound = cal_c1 * prefactor * bracket;
    const double beta_bracket = std::pow(n.k2 / n.k1, 4.0 * d * d + epsilon) +
                                std::pow(grad_sigma_sup * grad_sigma_sup / n.k1, 4.0 * d * d + epsilon) +
                                std::pow(b2_sup / n.k1, 4.0 * d + epsilon);
    r.beta_threshold = -cal_c2 * (b1_sup * b1_sup + n.k2 * b1_sup) / std::sqrt(n.k1 * n.k2) *
                       beta_bracket;
    return r;
}

ConstantBundle make_constant_bundle(const ModelNorms& n, const CalibrationSet& cal) {
    ConstantBundle b;
    b.inputs = n;
    b.calibration = cal;
    b.gamma = gamma_factor(n.k1, n.k2, n.norm_grad_sigma, n.norm_b, n.p, n.rho, n.d);
    b.gamma_prime = gamma_prime(n.k1, n.k2, n.norm_grad_sigma, n.rho, n.d);
    b.gamma_tilde = gamma_tilde(n, cal);
    b.gamma_sec6 = gamma_section6(n, cal);
    b.lambda_zvonkin = sdeflow::lambda_zvonkin(n, cal);
    const CBundle c = c_bundle(n, cal);
    b.c1 = c.c1;
    b.c2 = c.c2;
    b.c3 = c.c3;
    b.alpha = c.alpha;
    b.kappa_star = sdeflow::kappa_star(n, cal);
    b.beta_zero = sdeflow::beta_zero(n.k1, n.k2, n.norm_b1, b.gamma_sec6);
    const double lambda = b.lambda_zvonkin;
    const TransformedNormBounds t = transformed_bounds(n, cal, lambda);
    b.tilde_k1 = t.tilde_k1;
    b.tilde_k2 = t.tilde_k2;
    VarrhoInputs vi{t.b_inf, t.sigma_inf, t.grad_b_lp, t.grad_sigma_lp, t.tilde_k2,
                    b.gamma_tilde};
    b.varrho_bracket = varrho(1.0, vi);
    const double alpha_holder = 1.0 - double(n.d) / n.rho;
    b.lambda_min_pde = lambda_min_pde(n.k1, n.k2, omega_holder_proxy(n, cal), alpha_holder,
                                      n.norm_b, n.p, n.d, cal);
    return b;
}

nlohmann::json calibration_to_json(const CalibrationSet& c) {
    nlohmann::json j;
    j["c_prd"] = c.c_prd;
    j["c0_pde"] = c.c0_pde;
    j["c1_star"] = c.c1_star;
    j["c2_star"] = c.c2_star;
    j["c_holder"] = c.c_holder;
    j["c_c3"] = c.c_c3;
    j["kappa0"] = c.kappa0;
    j["kappa1"] = c.kappa1;
    nlohmann::json kq = nlohmann::json::object();
    for (const auto& [q, v] : c.c_kry_per_q) kq[std::to_string(q)] = v;
    j["c_kry"] = kq;
    if (!c.provenance.empty()) j["provenance"] = c.provenance;
    return j;
}

CalibrationSet calibration_from_json(const nlohmann::json& j) {
    CalibrationSet c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "c_prd") c.c_prd = it->get<double>();
        else if (k == "c0_pde") c.c0_pde = it->get<double>();
        else if (k == "c1_star") c.c1_star = it->get<double>();
        else if (k == "c2_star") c.c2_star = it->get<double>();
        else if (k == "c_holder") c.c_holder = it->get<double>();
        else if (k == "c_c3") c.c_c3 = it->get<double>();
        else if (k == "kappa0") c.kappa0 = it->get<double>();
        else if (k == "kappa1") c.kappa1 = it->get<double>();
        else if (k == "c_kry") {
            for (auto kt = it->begin(); kt != it->end(); ++kt)
                c.c_kry_per_q[std::stod(kt.key())] = kt->get<double>();
        } else if (k == "provenance") {
            c.provenance = it->get<std::map<std::string, std::string>>();
        } else {
            throw std::invalid_argument("calibration: unknown key '" + k + "'");
        }
    }
    for (const auto& [_, v] : c.c_kry_per_q)
        if (!(v > 0.0)) throw std::invalid_argument("calibration: entries must be > 0");
    return c;
}

nlohmann::json bundle_to_json(const ConstantBundle& b) {
    nlohmann::json j;
    j["gamma"] = b.gamma;
    j["gamma_tilde"] = b.gamma_tilde;
    j["gamma_prime"] = b.gamma_prime;
    j["gamma_section6"] = b.gamma_sec6;
    j["lambda_zvonkin"] = b.lambda_zvonkin;
    j["c1"] = b.c1;
    j["c2"] = b.c2;
    j["c3"] = b.c3;
    j["alpha"] = b.alpha;
    j["kappa_star"] = b.kappa_star;
    j["beta_zero"] = b.beta_zero;
    j["varrho_bracket"] = b.varrho_bracket;
    j["lambda_min_pde"] = b.lambda_min_pde;
    j["tilde_k1"] = b.tilde_k1;
    j["tilde_k2"] = b.tilde_k2;
    j["inputs"] = {{"d", b.inputs.d},
                   {"p", b.inputs.p},
                   {"rho", b.inputs.rho},
                   {"k1", b.inputs.k1},
                   {"k2", b.inputs.k2},
                   {"norm_b", b.inputs.norm_b},
                   {"norm_b1", b.inputs.norm_b1},
                   {"norm_b2", b.inputs.norm_b2},
                   {"norm_grad_sigma", b.inputs.norm_grad_sigma},
                   {"sigma_sup", b.inputs.sigma_sup}};
    j["calibration"] = calibration_to_json(b.calibration);
    return j;
}

} // namespace sdeflow
