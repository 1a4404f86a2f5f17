#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "sdeflow/elliptic.hpp"
#include "sdeflow/simulate.hpp"

using namespace sdeflow;

namespace {

EllipticProblem laplace_1d(double lambda, double radius = 8.0, double h = 0.02) {
    EllipticProblem p;
    p.dims = 1;
    p.lambda = lambda;
    p.a = make_scalar_diffusion(1, 1.0); // a = 1
    p.b = make_zero_field(1);
    p.f = make_constant_scalar(1, 0.0);
    p.domain_radius = radius;
    p.h = h;
    return p;
}

// manufactured solution u* = exp(-x^2)
double u_star(double x) { return std::exp(-x * x); }
double u_star_dd(double x) { return (4.0 * x * x - 2.0) * std::exp(-x * x); }

double max_error_1d(const EllipticProblem& prob, double (*exact)(double)) {
    SolveInfo info;
    auto u = solve(prob, &info);
    CHECK(info.residual_rel <= 1e-10);
    double err = 0.0;
    for (int i = 0; i < u.nx; ++i) err = std::max(err, std::fabs(u.at(i) - exact(u.x(i))));
    return err;
}

} // namespace

TEST_CASE("solve: zero data gives the zero solution exactly") {
    auto prob = laplace_1d(1.0);
    auto u = solve(prob);
    for (double v : u.v) CHECK(v == 0.0);
}

TEST_CASE("solve: manufactured 1-D solution converges at order 2 (pure diffusion)") {
    const double lambda = 1.0;
    auto make = [&](double h) {
        EllipticProblem p = laplace_1d(lambda, 8.0, h);
        p.f.eval = [lambda](const double* x) {
            return lambda * u_star(x[0]) - u_star_dd(x[0]);
        };
        return p;
    };
    const double e1 = max_error_1d(make(0.02), u_star);
    const double e2 = max_error_1d(make(0.01), u_star);
    const double ratio = e1 / e2;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("solve: manufactured 1-D solution with constant drift, central differencing") {
    const double lambda = 1.0;
    auto make = [&](double h) {
        EllipticProblem p = laplace_1d(lambda, 8.0, h);
        p.b = make_polynomial_field(1, {{1.0}}); // b = 1
        p.f.eval = [lambda](const double* x) {
            const double xx = x[0];
            return lambda * u_star(xx) - u_star_dd(xx) + (-2.0 * xx) * u_star(xx);
        };
        return p;
    };
    const double e1 = max_error_1d(make(0.02), u_star);
    const double e2 = max_error_1d(make(0.01), u_star);
    const double ratio = e1 / e2;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("solve: linearity in the data") {
    auto p1 = laplace_1d(2.0, 4.0, 0.05);
    p1.f = make_bump_scalar(1, 1.0, 1.0);
    auto p2 = laplace_1d(2.0, 4.0, 0.05);
    p2.f = make_gaussian_scalar(1, 1.0, 1.0);
    auto pc = laplace_1d(2.0, 4.0, 0.05);
    const double alpha = 2.0, beta = -0.5;
    pc.f.eval = [&](const double* x) {
        return alpha * p1.f.eval(x) + beta * p2.f.eval(x);
    };
    auto u1 = solve(p1), u2 = solve(p2), uc = solve(pc);
    for (int i = 0; i < uc.nx; ++i)
        CHECK(uc.at(i) ==
              doctest::Approx(alpha * u1.at(i) + beta * u2.at(i)).epsilon(1e-9));
}

TEST_CASE("solve: discrete maximum principle with upwinding") {
    // strong drift so the Peclet number exceeds 1 and upwinding engages
    EllipticProblem p = laplace_1d(1.0, 4.0, 0.05);
    p.b = make_polynomial_field(1, {{80.0}}); // |b| h / (2 a) = 2 > 1
    p.f = make_bump_scalar(1, 1.0, 2.0);
    SolveInfo info;
    auto u = solve(p, &info);
    CHECK(info.upwinded_nodes > 0);
    for (double v : u.v) CHECK(v >= -1e-14);
}

TEST_CASE("solve: 2-D manufactured solution") {
    // u* = exp(-(x^2+y^2)) on a truncated domain; the coefficient matrix
    // a = diag(1, 2) exercises the anisotropic stencil
    EllipticProblem p;
    p.dims = 2;
    p.lambda = 1.0;
    p.a = make_diagonal_diffusion({1.0, 2.0});
    p.b = make_zero_field(2);
    p.domain_radius = 5.0;
    p.h = 0.1;
    p.f.dim = 2;
    p.f.eval = [](const double* x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        const double u = std::exp(-r2);
        const double uxx = (4.0 * x[0] * x[0] - 2.0) * u;
        const double uyy = (4.0 * x[1] * x[1] - 2.0) * u;
        return u - (1.0 * uxx + 2.0 * uyy);
    };
    SolveInfo info;
    auto u = solve(p, &info);
    CHECK(info.residual_rel <= 1e-10);
    double err = 0.0;
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            const double r2 = u.x(i) * u.x(i) + u.y(j) * u.y(j);
            err = std::max(err, std::fabs(u.at(i, j) - std::exp(-r2)));
        }
    CHECK(err < 5e-3); // O(h^2) at h = 0.1
}

TEST_CASE("solve rejects indefinite coefficients and 3-D requests") {
    auto p = laplace_1d(1.0, 2.0, 0.1);
    p.a = make_scalar_diffusion(1, 0.0); // a = 0 on the grid
    CHECK_THROWS(solve(p));
    EllipticProblem p3;
    p3.dims = 3;
    CHECK_THROWS(solve(p3));
    auto pl = laplace_1d(0.0);
    CHECK_THROWS(solve(pl)); // lambda must be positive
}

TEST_CASE("solve tags results below the advisory threshold") {
    auto p = laplace_1d(1.0, 2.0, 0.1);
    p.f = make_bump_scalar(1, 1.0, 1.0);
    SolveInfo info;
    solve(p, &info, 10.0);
    CHECK(info.below_paper_threshold);
    solve(p, &info, 0.5);
    CHECK(!info.below_paper_threshold);
}

TEST_CASE("verify_apriori: resolvent decay slopes (1-D, p = p' = inf)") {
    auto p = laplace_1d(1.0, 8.0, 0.02);
    p.f = make_bump_scalar(1, 1.0, 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    auto rep = verify_apriori(p, {10.0, 100.0, 1000.0, 10000.0}, inf, inf);
    // paper exponents: |u| decays at least like lambda^{-1}, |grad u| like
    // lambda^{-1/2}
    CHECK(rep.paper_slope_u == doctest::Approx(-1.0));
    CHECK(rep.paper_slope_grad == doctest::Approx(-0.5));
    CHECK(rep.pass_u);
    CHECK(rep.pass_grad);
    CHECK(rep.slope_u <= -0.9);
}

TEST_CASE("verify_apriori: linearity of the norms in f, slopes unchanged") {
    auto p = laplace_1d(1.0, 6.0, 0.05);
    p.f = make_bump_scalar(1, 1.0, 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    auto r1 = verify_apriori(p, {10.0, 100.0, 1000.0, 10000.0}, inf, inf);
    auto p10 = p;
    p10.f = make_bump_scalar(1, 10.0, 1.0);
    auto r10 = verify_apriori(p10, {10.0, 100.0, 1000.0, 10000.0}, inf, inf);
    for (std::size_t i = 0; i < r1.u_norm.size(); ++i) {
        CHECK(r10.u_norm[i] == doctest::Approx(10.0 * r1.u_norm[i]).epsilon(1e-9));
        CHECK(r10.grad_norm[i] == doctest::Approx(10.0 * r1.grad_norm[i]).epsilon(1e-9));
    }
    CHECK(r10.slope_u == doctest::Approx(r1.slope_u).epsilon(1e-9));
}

TEST_CASE("verify_apriori rejects thin sweeps") {
    auto p = laplace_1d(1.0, 2.0, 0.1);
    p.f = make_bump_scalar(1, 1.0, 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS(verify_apriori(p, {10.0}, inf, inf));
    CHECK_THROWS(verify_apriori(p, {10.0, 20.0, 30.0, 40.0}, inf, inf)); // < 2 decades
}

TEST_CASE("zvonkin_transform: zero drift is the identity transform") {
    SdeModel m;
    m.dim = 1;
    m.drift_b1 = make_zero_field(1);
    m.drift_b2 = make_zero_field(1);
    m.diffusion = make_scalar_diffusion(1, 1.0);
    m.k1 = m.k2 = 1.0;
    m.p = 6.0;
    m.rho = 6.0;
    auto z = zvonkin_transform(m, 100.0, 4.0, 0.05);
    CHECK(z.certified);
    CHECK(z.sup_U == 0.0);
    CHECK(z.sup_gradU == 0.0);
    CHECK(z.sup_b_tilde == 0.0);
    // sigma~ = sigma
    CHECK(z.ellipticity_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z.ellipticity_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z.psi_max_residual <= 1e-10);
}

TEST_CASE("zvonkin_transform: bounded bump drift certifies at lambda = 1e3") {
    SdeModel m;
    m.dim = 1;
    m.drift_b1 = make_bump_field(1, 1.0, 1.0, 0);
    m.drift_b2 = make_zero_field(1);
    m.diffusion = make_scalar_diffusion(1, 1.0);
    m.k1 = m.k2 = 1.0;
    m.p = 6.0;
    m.rho = 6.0;
    auto z = zvonkin_transform(m, 1000.0, 8.0, 0.02);
    CHECK(z.certified);
    CHECK(z.sup_U < 0.5);
    CHECK(z.sup_gradU < 0.5);
    CHECK(z.psi_max_residual <= 1e-8);
    CHECK(z.tilde_k1 == doctest::Approx(0.25));
    CHECK(z.tilde_k2 == doctest::Approx(2.25));
    CHECK(z.ellipticity_min >= 0.25 - 1e-6);
    CHECK(z.ellipticity_max <= 2.25 + 1e-6);

    // lambda -> 4 lambda shrinks the corrector sup norm
    auto z4 = zvonkin_transform(m, 4000.0, 8.0, 0.02);
    CHECK(z4.sup_U < z.sup_U);
}

TEST_CASE("grid binary export round trips through the shared container") {
    GridFunction g(1, 2.0, 0.5);
    for (int i = 0; i < g.nx; ++i) g.at(i) = std::sin(double(i));
    const std::string path = "grid_roundtrip_test.bin";
    write_grid_binary(path, g);
    auto back = read_trajectory_binary(path);
    CHECK(back.dim == 2); // coordinate + value
    CHECK(back.n_members == g.nx);
    REQUIRE(back.snapshots.size() == 1);
    for (int i = 0; i < g.nx; ++i) {
        CHECK(back.snapshots[0][2 * i] == g.x(i));
        CHECK(back.snapshots[0][2 * i + 1] == g.at(i));
    }
    std::remove(path.c_str());
}

TEST_CASE("grid function interpolation and localized norms") {
    GridFunction g(1, 2.0, 0.5);
    for (int i = 0; i < g.nx; ++i) g.at(i) = g.x(i);
    double x = 0.25;
    CHECK(g.interp(&x) == doctest::Approx(0.25));
    x = 5.0;
    CHECK(g.interp(&x) == 0.0); // outside the lattice

    GridFunction c(1, 2.0, 0.01);
    for (auto& v : c.v) v = 1.0;
    CHECK(localized_grid_norm(c, std::numeric_limits<double>::infinity()) == 1.0);
    // |xi|_L2 oracle from the quadrature run
    CHECK(localized_grid_norm(c, 2.0) == doctest::Approx(1.185624414717).epsilon(1e-3));
}
