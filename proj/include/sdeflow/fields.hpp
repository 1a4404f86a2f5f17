#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace sdeflow {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Localization kernel xi: smooth bump, xi == 1 on |x| <= 1/2, xi == 0 for
// |x| > 1, glued by the standard exp(-1/t)-based smoothstep on [1/2, 1].
// Fixed once; the localized norms below depend on this exact profile.
// ---------------------------------------------------------------------------

inline double smoothstep_blend(double t) {
    // C-infinity monotone step: 0 at t<=0, 1 at t>=1.
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

inline double bump_profile(double s) {
    s = std::fabs(s);
    if (s <= 0.5) return 1.0;
    if (s > 1.0) return 0.0;
    return smoothstep_blend(2.0 * (1.0 - s));
}

inline double bump_value(const double* x, int dim) {
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
    return bump_profile(std::sqrt(r2));
}

struct LocalizationKernel {
    double delta = 1.0; // support radius; fixed to 1 throughout
    double operator()(const double* x, int dim) const {
        if (delta == 1.0) return bump_value(x, dim);
        std::vector<double> y(x, x + dim);
        for (auto& v : y) v /= delta;
        return bump_value(y.data(), dim);
    }
};

// ---------------------------------------------------------------------------
// Declared singular sets: isolated points and axis hyperplanes {x_i = c}.
// Quadrature excludes a ball of radius 1e-6 and refines adaptively nearby;
// the integrator substitutes a capped drift only when a state sits exactly
// on the set.
// ---------------------------------------------------------------------------

struct SingularSet {
    std::vector<std::vector<double>> points;
    std::vector<std::pair<int, double>> hyperplanes; // (axis, offset)

    bool empty() const { return points.empty() && hyperplanes.empty(); }

    double distance(const double* x, int dim) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : points) {
            double r2 = 0.0;
            for (int i = 0; i < dim; ++i) {
                const double d = x[i] - p[i];
                r2 += d * d;
            }
            best = std::min(best, std::sqrt(r2));
        }
        for (const auto& [axis, c] : hyperplanes)
            best = std::min(best, std::fabs(x[axis] - c));
        return best;
    }
};

// ---------------------------------------------------------------------------
// Field oracles. Oracles must be pure and reentrant; all evaluation is safe
// to call concurrently.
// ---------------------------------------------------------------------------

struct ScalarField {
    int dim = 0;
    std::function<double(const double*)> eval;
    SingularSet singular;
    std::string kind;

    double operator()(const double* x) const { return eval(x); }
};

struct VectorField {
    int dim = 0;
    std::function<void(const double*, double*)> eval;
    bool is_zero = false;
    SingularSet singular;
    std::string kind;
    json spec() const;      // config echo
    json spec_json;         // original constructor parameters

    void operator()(const double* x, double* out) const { eval(x, out); }
};

struct MatrixField {
    int dim = 0;
    std::function<void(const double*, double*)> eval; // row-major dim x dim
    bool is_constant = false;
    std::vector<double> constant_value;
    std::string kind;
    json spec() const;
    json spec_json;

    void operator()(const double* x, double* out) const { eval(x, out); }
};

// Built-in vector field constructors (the model config surface).
VectorField make_zero_field(int dim);
VectorField make_linear_field(int dim, double coefficient);
VectorField make_matrix_linear_field(int dim, const std::vector<double>& matrix);
VectorField make_constant_radial_field(int dim, double speed);
VectorField make_clamp_linear_field(int dim, double coefficient);
VectorField make_polynomial_field(int dim, const std::vector<std::vector<double>>& coeffs);
VectorField make_bump_field(int dim, double height, double width, int axis);
VectorField make_power_singular_field(int dim, double exponent_q, int input_axis, int output_axis);
VectorField make_example25_drift(double exponent_q);
VectorField make_sum_field(std::vector<VectorField> terms);

// Built-in diffusion constructors.
MatrixField make_constant_matrix_diffusion(int dim, const std::vector<double>& matrix);
MatrixField make_scalar_diffusion(int dim, double epsilon);
MatrixField make_diagonal_diffusion(const std::vector<double>& entries);
MatrixField make_function_diffusion(int dim, std::function<void(const double*, double*)> f,
                                    const std::string& kind);

// Scalar field constructors (occupation functionals, PDE data).
ScalarField make_constant_scalar(int dim, double value);
ScalarField make_bump_scalar(int dim, double height, double width);
ScalarField make_gaussian_scalar(int dim, double height, double width);

// Construction from config JSON (and echo back); unknown kinds/keys rejected.
VectorField vector_field_from_json(int dim, const json& j);
MatrixField matrix_field_from_json(int dim, const json& j);
ScalarField scalar_field_from_json(int dim, const json& j);

} // namespace sdeflow
