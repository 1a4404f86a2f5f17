#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdeflow/fields.hpp"

namespace sdeflow {

// SDE coefficient fields with their analytic metadata. Drift splits as
// b = b1 + b2 (singular + radial/dissipative part); a = sigma sigma* obeys
// K1 |z|^2 <= <a z, z> <= K2 |z|^2.
struct SdeModel {
    int dim = 1;
    VectorField drift_b1;
    VectorField drift_b2;
    MatrixField diffusion;
    double k1 = 1.0;
    double k2 = 1.0;
    double p = 0.0;   // drift integrability exponent, > 2d
    double rho = 0.0; // diffusion-gradient integrability exponent, > 2d

    // Declared norms (NaN = undeclared); measured values are cross-checks,
    // never overrides.
    double norm_b = std::numeric_limits<double>::quiet_NaN();
    double norm_b1 = std::numeric_limits<double>::quiet_NaN();
    double norm_b2 = std::numeric_limits<double>::quiet_NaN();
    double norm_grad_sigma = std::numeric_limits<double>::quiet_NaN();
    double sigma_sup = std::numeric_limits<double>::quiet_NaN();

    void validate() const;

    void drift(const double* x, double* out) const;
    void drift_matrix(const double* x, double* sigma_out) const { diffusion.eval(x, sigma_out); }

    double singular_distance(const double* x) const;
    bool has_singular_set() const {
        return !drift_b1.singular.empty() || !drift_b2.singular.empty();
    }
};

// Quadrature window for localized L_p norms: a lattice of translate centers z
// and a tensor midpoint rule over each unit ball, with adaptive refinement
// and a 1e-6 exclusion ball around declared singular points.
struct NormWindow {
    std::vector<std::vector<double>> centers;
    int cells_per_axis = 64;
    int max_refine_depth = 20;
    double exclusion_radius = 1e-6;
};

// Convenience: regular lattice of centers with given spacing covering
// [-extent, extent]^dim.
NormWindow lattice_window(int dim, double extent, double spacing, int cells_per_axis = 64);

double localized_lp_norm(const ScalarField& f, double p, const NormWindow& window);
double localized_lp_norm(const VectorField& f, double p, const NormWindow& window);

struct EllipticityViolation {
    std::vector<double> point;
    std::vector<double> direction;
    double rayleigh;
};

struct EllipticityReport {
    double k1_hat = 0.0;
    double k2_hat = 0.0;
    std::vector<EllipticityViolation> violations;
};

EllipticityReport probe_ellipticity(const SdeModel& model,
                                    const std::vector<std::vector<double>>& sample,
                                    int directions_per_point, double tolerance = 1e-9);

struct HolderEstimate {
    double omega_hat = 0.0; // max ||a(x)-a(y)|| / |x-y|^(1-d/rho)
    int pairs_used = 0;
    int pairs_skipped = 0; // |x-y| > 1
};

HolderEstimate holder_modulus_a(const SdeModel& model,
                                const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs);

struct ShellEstimate {
    double value = 0.0;
    double shell_cap = 0.0; // truncation radius, reported so it is explicit
    int samples = 0;
};

// beta^*(r) = sup_{|x|>=r} x.b2(x)/|x| + (d-1) K2 / (2r), sampled over the
// truncated shell r <= |x| <= shell_cap by stratified radius x direction
// points.
ShellEstimate beta_star(const SdeModel& model, double r, double shell_cap, int samples);

// beta_*(r) = inf_{|x|>=r} x.b2(x)/|x| over the truncated shell (no
// curvature correction).
ShellEstimate beta_lower(const SdeModel& model, double r, double shell_cap, int samples);

// Spectral norm of a symmetric dim x dim matrix (cyclic Jacobi).
double symmetric_spectral_norm(const std::vector<double>& m, int dim);
void symmetric_eigenvalues(const std::vector<double>& m, int dim, std::vector<double>& eigs);

// Deterministic direction samples: signs (d=1), equal angles (d=2),
// Fibonacci sphere (d=3).
std::vector<std::vector<double>> unit_directions(int dim, int count);

} // namespace sdeflow
