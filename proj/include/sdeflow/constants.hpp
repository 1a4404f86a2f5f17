#pragma once

#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace sdeflow {

// Named calibration factors standing in for the unspecified universal
// constants. All default to 1 and are echoed in every output; the artifact's
// claims are functional-form claims, not absolute ones.
struct CalibrationSet {
    std::map<double, double> c_kry_per_q; // C_Kry(q)
    double c_prd = 1.0;    // prefactor of the linear-expansion-rate formula
    double c0_pde = 1.0;   // resolvent-threshold constant
    double c1_star = 1.0;  // constant inside the transform lambda
    double c2_star = 1.0;  // second-derivative bound constant
    double c_holder = 1.0; // Holder-modulus-of-a proxy constant
    double c_c3 = 1.0;     // Girsanov-tail constant in the c3 formula
    double kappa0 = 1.0;   // stability-estimate prefactor (fit target only)
    double kappa1 = 1.0;   // stability-estimate exponent factor (fit target only)
    std::map<std::string, std::string> provenance;

    double c_kry(double q) const {
        auto it = c_kry_per_q.find(q);
        return it == c_kry_per_q.end() ? 1.0 : it->second;
    }
};

struct ModelNorms {
    int d = 1;
    double p = 0.0, rho = 0.0;
    double k1 = 1.0, k2 = 1.0;
    double norm_b = 0.0;
    double norm_b1 = 0.0;
    double norm_b2 = 0.0;
    double norm_grad_sigma = 0.0;
    double sigma_sup = 1.0;
};

// Gamma = (K2/K1)^{4d^2/(1-d/rho)} + (|grad sigma|^2/K1)^{4d^2/(1-d/rho)}
//       + (|b|/K1)^{4d/(1-d/p)}
double gamma_factor(double k1, double k2, double norm_grad_sigma, double norm_b, double p,
                    double rho, int d);

// Gamma' : same without the drift term (driftless occupation bounds).
double gamma_prime(double k1, double k2, double norm_grad_sigma, double rho, int d);

// Gamma of the attractor section: C_Kry(p/2) * gamma with |b2| in the drift slot.
double gamma_section6(const ModelNorms& n, const CalibrationSet& cal);

// Linear expansion rate bound for the singular SDE.
double kappa_star(const ModelNorms& n, const CalibrationSet& cal);

// beta0 = 4 (|b1|^2 Gamma + K2 |b1| sqrt(Gamma)) / sqrt(K1 K2)
double beta_zero(double k1, double k2, double norm_b1, double gamma);

// Resolvent parameter of the drift-removing transform.
double lambda_zvonkin(const ModelNorms& n, const CalibrationSet& cal);

// Holder modulus proxy for a = sigma sigma*: c * sqrt(K2) |grad sigma|.
double omega_holder_proxy(const ModelNorms& n, const CalibrationSet& cal);

// Norm bounds for the transformed coefficients, derived from the resolvent
// estimates (each entry is the minimum of the applicable closed-form bounds;
// all vanish with |b| where the transform is trivial).
struct TransformedNormBounds {
    double tilde_k1 = 0.0;     // K1/4
    double tilde_k2 = 0.0;     // 9 K2/4
    double b_inf = 0.0;        // |b~|_inf
    double b_lp = 0.0;         // |b~|_Lp
    double grad_b_lp = 0.0;    // |grad b~|_Lp
    double grad_sigma_lp = 0.0; // |grad sigma~|_{L_{p ^ rho}}
    double sigma_inf = 0.0;    // |sigma~|_inf
};
TransformedNormBounds transformed_bounds(const ModelNorms& n, const CalibrationSet& cal,
                                         double lambda);

// Gamma~ evaluated on the transformed norm bounds.
double gamma_tilde(const ModelNorms& n, const CalibrationSet& cal);

// Stability-estimate exponent factor; lipschitz_variant uses the r^2 form
// with Lipschitz constant L for sigma~.
struct VarrhoInputs {
    double b_inf = 0.0;
    double sigma_inf = 0.0;
    double grad_b_lp = 0.0;
    double grad_sigma_lp = 0.0;
    double tilde_k2 = 0.0;
    double gamma_tilde = 0.0;
};
double varrho(double r, const VarrhoInputs& in, bool lipschitz_variant = false, double L = 0.0);

struct CBundle {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double alpha = 3.0;
};
CBundle c_bundle(const ModelNorms& n, const CalibrationSet& cal);

// Threshold lambda of the resolvent a-priori estimates.
double lambda_min_pde(double k1, double k2, double omega_alpha, double alpha_holder,
                      double norm_b, double p1, int d, const CalibrationSet& cal);

// Occupation-integral bound: C_Kry(q) Gamma (K2^{-1/2} sqrt(dt) + dt) |f|_q.
double krylov_bound(double gamma, double k2, double window, double norm_f, double q,
                    const CalibrationSet& cal);

// Exponential-moment bound 2 * 2^{T (kappa^2/K2 + 2 kappa)} with
// kappa = 2 C_Kry(q) lambda Gamma |f|_q.
struct KhasminskiiBound {
    double kappa = 0.0;
    double bound = 0.0;
};
KhasminskiiBound khasminskii_bound(double gamma, double k2, double lambda, double T,
                                   double norm_f, double q, const CalibrationSet& cal);

// Bounded-coefficient case study: expansion-rate bound and drift threshold
// with epsilon-padded exponents.
struct BoundedCaseStudy {
    double kappa_bound = 0.0;
    double beta_threshold = 0.0;
    double epsilon = 0.0;
};
BoundedCaseStudy bounded_case_study(const ModelNorms& n, double b_sup, double b1_sup,
                                    double b2_sup, double grad_sigma_sup, double epsilon,
                                    double cal_c1, double cal_c2);

// The full derived-constant bundle with an input echo; recomputation from the
// echo is bit-identical (all evaluators are pure).
struct ConstantBundle {
    double gamma = 0.0;
    double gamma_tilde = 0.0;
    double gamma_prime = 0.0;
    double gamma_sec6 = 0.0;
    double lambda_zvonkin = 0.0;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, alpha = 3.0;
    double kappa_star = 0.0;
    double beta_zero = 0.0;
    double varrho_bracket = 0.0; // varrho(r) = r^4 * bracket
    double lambda_min_pde = 0.0;
    double tilde_k1 = 0.0, tilde_k2 = 0.0;
    ModelNorms inputs;
    CalibrationSet calibration;

    double varrho_at(double r) const { return r * r * r * r * varrho_bracket; }
};

ConstantBundle make_constant_bundle(const ModelNorms& n, const CalibrationSet& cal);

nlohmann::json bundle_to_json(const ConstantBundle& b);
nlohmann::json calibration_to_json(const CalibrationSet& c);
CalibrationSet calibration_from_json(const nlohmann::json& j);

} // namespace sdeflow
