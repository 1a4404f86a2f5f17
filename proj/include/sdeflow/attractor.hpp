#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdeflow/model.hpp"
#include "sdeflow/simulate.hpp"

namespace sdeflow {

struct AbsorptionScenario {
    double gamma = 0.0;  // linear rate of the shrinking/growing start ball
    double r = 1.0;      // target ball radius
    double horizon = 8.0; // max pullback depth
    std::vector<double> depths; // pullback depths, within horizon
    int mesh_resolution = 16;
    int replicas = 100;
    double dt = 1e-2;
};

struct ProbabilityReport {
    int replicas = 0;
    int passes = 0;
    double probability = 0.0;
    double ci_low = 0.0, ci_high = 0.0; // Wilson 95%
    std::vector<char> flags;            // per replica
    std::string notes;
    double beta_margin = 0.0; // beta - (-beta0), advisory only
};

// P(for all sampled depths t and all sampled x in B_{gamma t}:
//   |psi_{-t,0}(x)| <= r), one shared noise path per replica across depths.
// Start sets are tracked by their boundary mesh plus the origin witness.
ProbabilityReport pullback_absorption(const SdeModel& model, const AbsorptionScenario& sc,
                                      std::uint64_t base_seed, const TamingSpec& taming = {},
                                      const ExecPolicy& exec = {},
                                      double beta_advisory = 0.0, double beta_zero_advisory = 0.0);

// Proxy for P(B_{gamma t} subset psi_t(B_r) for all sampled t): the boundary
// image must stay outside B_{gamma t}, plus an interior containment witness
// (in d = 1 endpoint ordering, in d = 2 the winding number of the boundary
// image around the origin, in d = 3 the image of the center). The report is
// stamped as a proxy; the origin-witness probability is reported separately.
struct ExpansionReport : ProbabilityReport {
    double origin_witness_probability = 0.0;
    std::string proxy = "boundary-image norm lower bound + interior containment witness";
};

ExpansionReport forward_expansion(const SdeModel& model, double r, double gamma, double horizon,
                                  const std::vector<double>& sample_times, int mesh_resolution,
                                  int replicas, double dt, std::uint64_t base_seed,
                                  const TamingSpec& taming = {}, const ExecPolicy& exec = {});

// Exact bound evaluation for the one-point estimates, cases 1-5. Values can
// exceed 1 (then vacuous, flagged).
struct Lemma61Params {
    double T = 1.0;
    double r = 1.0, r1 = 0.0, r2 = 0.0, R = 0.0;
    double delta = 0.0, delta1 = 0.0;
    double beta_star = 0.0;  // beta^*(r)
    double beta_lower = 0.0; // beta_*(r)
    double gamma_factor = 1.0; // the occupation-bound Gamma (with |b2| and C_Kry(p/2))
    double norm_b1 = 0.0;
    double k1 = 1.0, k2 = 1.0;
};

struct Lemma61Bound {
    double value = 0.0;
    bool vacuous = false; // >= 1
    double girsanov_exponent = 0.0;
};

Lemma61Bound lemma61_bound(int case_id, const Lemma61Params& p);

struct FalsifyReport {
    double empirical = 0.0;
    double se = 0.0;
    double bound = 0.0;
    bool bound_vacuous = false;
    bool violation = false; // empirical - 2 se > bound
    int replicas = 0;
    std::string event;
};

// Monte-Carlo estimate of the case event probability against the bound.
FalsifyReport lemma61_falsify(const SdeModel& model, int case_id, const Lemma61Params& p,
                              int replicas, double dt, std::uint64_t base_seed,
                              const TamingSpec& taming = {}, const ExecPolicy& exec = {});

struct CriterionMatrix {
    std::vector<double> r_grid;
    std::vector<double> R_grid;
    std::vector<double> depths;
    std::vector<std::vector<double>> probability; // [ri][Ri]
    int replicas = 0;
};

// P(every mesh point of B_r, pulled back from every sampled depth, lies in
// B_R), per (r, R) cell with mandatory per-replica trajectory reuse so the
// entries nest exactly in R and in horizon.
CriterionMatrix criterion_matrix(const SdeModel& model, const std::vector<double>& r_grid,
                                 const std::vector<double>& R_grid, double horizon,
                                 const std::vector<double>& depths, int mesh_resolution,
                                 int replicas, double dt, std::uint64_t base_seed,
                                 const TamingSpec& taming = {}, const ExecPolicy& exec = {});

std::string criterion_matrix_csv(const CriterionMatrix& m);

// Candidate r0 with beta^*(r0) <= 0, found by bisection on the sampled
// beta^*; reported without any sufficiency claim.
double candidate_r0(const SdeModel& model, double r_min, double r_max, double shell_cap,
                    int samples);

void wilson_interval(int passes, int n, double& lo, double& hi);

} // namespace sdeflow
