// Compares the serial reference kernels against the OpenMP ones on the two
// hot loops (ensemble stepping, replica batches) and checks that both produce
// bit-identical output.

#include <chrono>
#include <cstring>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sdeflow/dispersion.hpp"
#include "sdeflow/model.hpp"
#include "sdeflow/rng.hpp"
#include "sdeflow/simulate.hpp"

using namespace sdeflow;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SdeModel ou_model(int dim) {
    SdeModel m;
    m.dim = dim;
    m.drift_b1 = make_zero_field(dim);
    m.drift_b2 = make_linear_field(dim, -1.0);
    m.diffusion = make_scalar_diffusion(dim, 1.0);
    m.k1 = m.k2 = 1.0;
    m.p = 5.0 * dim;
    m.rho = 5.0 * dim;
    return m;
}

} // namespace

int main(int argc, char** argv) {
    const int members = argc > 1 ? std::atoi(argv[1]) : 4096;
    const int steps = argc > 2 ? std::atoi(argv[2]) : 2000;

    SdeModel model = ou_model(2);
    TimeGrid grid(0.0, 1e-3, steps);
    NoisePath noise(42, 2, grid);
    std::vector<double> initials;
    for (int m = 0; m < members; ++m) {
        const double th = 2.0 * M_PI * m / members;
        initials.push_back(std::cos(th));
        initials.push_back(std::sin(th));
    }

    std::cout << "ensemble step kernel: " << members << " members x " << steps << " steps\n";

    IntegrateOptions serial_opts;
    serial_opts.exec.threads = 0;
    auto t0 = std::chrono::steady_clock::now();
    auto serial = integrate_flow(model, initials, noise, grid, TamingSpec{}, serial_opts);
    const double t_serial = seconds_since(t0);
    std::cout << "  serial reference: " << t_serial << " s\n";

#ifdef _OPENMP
    for (int threads : {2, omp_get_max_threads()}) {
        IntegrateOptions par_opts;
        par_opts.exec.threads = threads;
        t0 = std::chrono::steady_clock::now();
        auto par = integrate_flow(model, initials, noise, grid, TamingSpec{}, par_opts);
        const double t_par = seconds_since(t0);
        const bool identical =
            std::memcmp(serial.final_positions.data(), par.final_positions.data(),
                        serial.final_positions.size() * sizeof(double)) == 0;
        std::cout << "  openmp x" << threads << ": " << t_par << " s  (speedup "
                  << t_serial / t_par << ", bit-identical: " << (identical ? "yes" : "NO")
                  << ")\n";
        if (!identical) return 1;
    }
#endif

    std::cout << "replica batch kernel: dispersion, 64 replicas\n";
    t0 = std::chrono::steady_clock::now();
    auto d_serial = measure_dispersion(model, 1.0, 64, 2.0, 1e-3, 64, 7, 0, TamingSpec{},
                                       ExecPolicy{0});
    const double r_serial = seconds_since(t0);
    std::cout << "  serial reference: " << r_serial << " s\n";
#ifdef _OPENMP
    t0 = std::chrono::steady_clock::now();
    auto d_par = measure_dispersion(model, 1.0, 64, 2.0, 1e-3, 64, 7, 0, TamingSpec{},
                                    ExecPolicy{omp_get_max_threads()});
    const double r_par = seconds_since(t0);
    const bool same = d_serial.kappa_hat == d_par.kappa_hat;
    std::cout << "  openmp x" << omp_get_max_threads() << ": " << r_par << " s  (speedup "
              << r_serial / r_par << ", identical: " << (same ? "yes" : "NO") << ")\n";
    if (!same) return 1;
#endif
    return 0;
}
