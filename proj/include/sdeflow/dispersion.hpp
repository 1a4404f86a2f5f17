#pragma once

#include <cstdint>
#include <vector>

#include "sdeflow/model.hpp"
#include "sdeflow/simulate.hpp"

namespace sdeflow {

struct ChainingParams {
    double c1 = 1.0;   // two-point growth constant
    double alpha = 3.0;
    int d = 1;
    double delta_dim = 0.0; // box dimension of the tracked set, default d-1
    double c2 = 1.0;   // one-point tail curvature
    double c3 = 0.0;   // one-point tail offset

    void validate() const;
};

// Piecewise rate function
//   I(gamma) = 0                                   for gamma <= c1 d^alpha
//            = d (gamma - c1 d^alpha)              on the middle branch
//            = gamma^{1+1/alpha} alpha (1+alpha)^{-1-1/alpha} c1^{-1/alpha}
//              for gamma >= c1 (alpha+1) d^alpha,
// the closed form of sup_{r>d} r (gamma - c1 r^alpha) clipped at 0.
double rate_function_I(double gamma, const ChainingParams& p);

struct KappaResult {
    double kappa = 0.0;
    int branch = 0; // 1 or 2
    double gamma_used = 0.0;
};

// kappa = sqrt((c3 + gamma_i Delta)/c2), branch chosen by d/(d-Delta) < alpha+1.
// force_branch = 0: automatic.
KappaResult kappa_from_constants(const ChainingParams& p, int force_branch = 0);

struct TwoPointResult {
    double sup_moment = 0.0; // E sup_{t<=T} |psi_t(x)-psi_t(y)|^r
    double sup_moment_se = 0.0;
    double end_moment = 0.0; // E |psi_T(x)-psi_T(y)|^r
    double end_moment_se = 0.0;
    int replicas = 0;
    int excluded = 0;
    bool valid = true; // false if >10% of replicas diverged
};

TwoPointResult two_point_moment(const SdeModel& model, const std::vector<double>& x,
                                const std::vector<double>& y, double r, double T, double dt,
                                int replicas, std::uint64_t base_seed,
                                const TamingSpec& taming = {}, const ExecPolicy& exec = {});

struct MomentRow {
    double r = 0.0;
    double T = 0.0;
    double moment = 0.0; // E sup |...|^r
};

struct FitResult {
    double c_hat = 0.0;
    double c1_hat = 0.0;
    std::vector<double> slopes_per_r;     // fitted c1 r^alpha per r
    std::vector<double> r_values;
    double max_abs_residual = 0.0;
    double separation = 0.0; // |x - y| used to normalize the intercept
};

// Log-linear fit of moment^{1/r} = c |x-y| exp(c1 r^alpha T): per-r slope over
// T gives c1 r^alpha; c1_hat is the median of slope / r^alpha.
FitResult fit_c1_alpha(const std::vector<MomentRow>& table, double alpha, double separation);

struct DispersionReport {
    std::vector<double> times;
    // per replica, per recorded time
    std::vector<std::vector<double>> sup_norm;
    std::vector<std::vector<double>> diameter;
    std::vector<double> kappa_hat; // per replica: sup over all steps of sup_norm/T
    double kappa_mean = 0.0;
    double kappa_q10 = 0.0, kappa_q50 = 0.0, kappa_q90 = 0.0;
    int mesh_resolution = 0;
    double radius = 0.0;
    double T = 0.0;
    int replicas = 0;
    std::uint64_t base_seed = 0;
};

// Tracks the boundary sphere of a ball through the flow (boundary images
// control images of the full set) and reports sup norms, diameters and the
// per-replica linear-rate statistic sup_t sup_x |psi_t(x)| / T.
DispersionReport measure_dispersion(const SdeModel& model, double radius, int mesh_resolution,
                                    double T, double dt, int replicas, std::uint64_t base_seed,
                                    std::int64_t snapshot_stride = 0,
                                    const TamingSpec& taming = {}, const ExecPolicy& exec = {});

std::string dispersion_csv(const DispersionReport& rep);

double quantile(std::vector<double> values, double q);

} // namespace sdeflow
