#pragma once

#include <cstdint>
#include <vector>

#include "sdeflow/dispersion.hpp"
#include "sdeflow/model.hpp"
#include "sdeflow/simulate.hpp"

namespace sdeflow {

// Stationary mean of B(y) = |y|^-q under the invariant measure of
// dY = clamp(-Y, -1, 1) dt + eps dW, whose density is proportional to
// exp(2 V(y)/eps^2) with V the antiderivative of the clamped drift. Adaptive
// 1-D quadrature with a power substitution at the integrable singularity.
double example25_stationary_mean(double epsilon, double q);

struct Example25Entry {
    double epsilon = 0.0;
    double empirical = 0.0; // (1/T) int_0^T B(Y_s) ds, left-endpoint
    double oracle = 0.0;    // stationary quadrature value
    double relative_deviation = 0.0;
    double end_x_over_t = 0.0; // X_T / T, the displacement rate
    std::int64_t singular_hits = 0;
};

struct Example25Report {
    double q = 0.0;
    double T = 0.0;
    double dt = 0.0;
    std::vector<Example25Entry> entries; // one per epsilon
    bool averages_increase_as_eps_drops = false;
};

// Simulates the degenerate-noise blow-up system for each epsilon and compares
// the empirical drift average with the quadrature oracle; checks the blow-up
// trend (averages increase as eps decreases).
Example25Report run_example_2_5(const std::vector<double>& epsilons, double q, double T,
                                double dt, std::uint64_t base_seed,
                                const TamingSpec& taming = {}, const ExecPolicy& exec = {});

struct BoundedCaseReport {
    double kappa_bound = 0.0;
    double beta_threshold = 0.0;
    double epsilon = 0.0;
    double measured_kappa_mean = 0.0;
    double measured_kappa_q90 = 0.0;
    double needed_calibration = 0.0; // measured mean / (bound at calibration 1)
    bool measured_within_bound = false;
};

BoundedCaseReport run_bounded_case_study(const SdeModel& model, double b_sup, double b1_sup,
                                         double b2_sup, double grad_sigma_sup, double epsilon,
                                         double cal_c1, double cal_c2, double T, double dt,
                                         int replicas, int mesh_resolution,
                                         std::uint64_t base_seed, const ExecPolicy& exec = {});

} // namespace sdeflow
