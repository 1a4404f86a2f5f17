#include "sdeflow/elliptic.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>

#include "sdeflow/io.hpp"
#include "sdeflow/simulate.hpp"

namespace sdeflow {

GridFunction::GridFunction(int dims_, double radius, double h_) : dims(dims_), h(h_) {
    const double n_cells = radius / h_;
    if (std::fabs(n_cells - std::llround(n_cells)) > 1e-9)
        throw std::invalid_argument("GridFunction: domain_radius/h must be integral");
    const int half = static_cast<int>(std::llround(n_cells));
    nx = 2 * half + 1;
    ny = dims == 2 ? nx : 1;
    x0 = -radius;
    y0 = dims == 2 ? -radius : 0.0;
    v.assign(static_cast<std::size_t>(nx) * ny, 0.0);
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double t : v) m = std::max(m, std::fabs(t));
    return m;
}

double GridFunction::interp(const double* p) const {
    const double fx = (p[0] - x0) / h;
    if (fx < 0.0 || fx > nx - 1) return 0.0;
    const int i = std::min(static_cast<int>(fx), nx - 2);
    const double wx = fx - i;
    if (dims == 1) return (1.0 - wx) * at(i) + wx * at(i + 1);
    const double fy = (p[1] - y0) / h;
    if (fy < 0.0 || fy > ny - 1) return 0.0;
    const int j = std::min(static_cast<int>(fy), ny - 2);
    const double wy = fy - j;
    return (1.0 - wx) * (1.0 - wy) * at(i, j) + wx * (1.0 - wy) * at(i + 1, j) +
           (1.0 - wx) * wy * at(i, j + 1) + wx * wy * at(i + 1, j + 1);
}

namespace {

struct StencilRow {
    // column offsets are encoded relative to the interior numbering
    std::vector<std::pair<long long, double>> entries;
    double rhs = 0.0;
};

double min_eig_2x2(double a11, double a12, double a22) {
    const double tr = a11 + a22;
    const double det = a11 * a22 - a12 * a12;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 - disc;
}

} // namespace

GridFunction solve(const EllipticProblem& prob, SolveInfo* info, double lambda_advisory) {
    if (prob.dims < 1 || prob.dims > 2)
        throw std::invalid_argument("elliptic solve: dims must be 1 or 2");
    if (!(prob.lambda > 0.0)) throw std::invalid_argument("elliptic solve: lambda must be > 0");

    GridFunction u(prob.dims, prob.domain_radius, prob.h);
    const int nx = u.nx, ny = u.ny;
    const double h = prob.h;
    const double inv_h2 = 1.0 / (h * h);

    SolveInfo local;
    local.below_paper_threshold = lambda_advisory > 0.0 && prob.lambda < lambda_advisory;

    const int d = prob.dims;
    std::vector<double> amat(d * d), bvec(d), x(2, 0.0);

    if (d == 1) {
        const int n = nx - 2;
        std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
        for (int i = 1; i <= n; ++i) {
            x[0] = u.x(i);
            prob.a.eval(x.data(), amat.data());
            prob.b.eval(x.data(), bvec.data());
            const double a = amat[0];
            if (!(a > 0.0)) throw std::runtime_error("elliptic solve: a not positive on grid");
            const double adv = prob.b_scale * bvec[0];
            const double diff = prob.a_scale * a;
            double dl = -diff * inv_h2, dd = prob.lambda + 2.0 * diff * inv_h2,
                   du = -diff * inv_h2;
            const double peclet = std::fabs(adv) * h / (2.0 * diff);
            if (peclet > 1.0) {
                ++local.upwinded_nodes;
                if (adv > 0.0) { // backward difference
                    dd += adv / h;
                    dl += -adv / h;
                } else {
                    dd += -adv / h;
                    du += adv / h;
                }
            } else {
                dl += -adv / (2.0 * h);
                du += adv / (2.0 * h);
            }
            lower[i - 1] = dl;
            diag[i - 1] = dd;
            upper[i - 1] = du;
            rhs[i - 1] = prob.f.eval(x.data());
        }
        // Thomas elimination
        std::vector<double> c(n, 0.0), dvec(n, 0.0);
        c[0] = upper[0] / diag[0];
        dvec[0] = rhs[0] / diag[0];
        for (int i = 1; i < n; ++i) {
            const double m = diag[i] - lower[i] * c[i - 1];
            if (m == 0.0) throw std::runtime_error("elliptic solve: singular tridiagonal system");
            c[i] = upper[i] / m;
            dvec[i] = (rhs[i] - lower[i] * dvec[i - 1]) / m;
        }
        std::vector<double> sol(n);
        sol[n - 1] = dvec[n - 1];
        for (int i = n - 2; i >= 0; --i) sol[i] = dvec[i] - c[i] * sol[i + 1];
        for (int i = 1; i <= n; ++i) u.at(i) = sol[i - 1];
        // residual
        double rn = 0.0, fn = 0.0;
        for (int i = 1; i <= n; ++i) {
            double r = diag[i - 1] * sol[i - 1] - rhs[i - 1];
            if (i > 1) r += lower[i - 1] * sol[i - 2];
            if (i < n) r += upper[i - 1] * sol[i];
            rn += r * r;
            fn += rhs[i - 1] * rhs[i - 1];
        }
        local.residual_rel = std::sqrt(rn) / std::max(std::sqrt(fn), 1e-300);
        local.iterations = 1;
        if (info) *info = local;
        return u;
    }

    // 2-D: rows are assembled in parallel into per-row slots and concatenated
    // in fixed order; the solve is BiCGSTAB + ILUT (the upwinded operator is
    // nonsymmetric).
    const int mx = nx - 2, my = ny - 2;
    const long long n = static_cast<long long>(mx) * my;
    Eigen::VectorXd rhs(n);

    auto idx = [mx](int i, int j) { return static_cast<long long>(j - 1) * mx + (i - 1); };

    struct RowEntry {
        long long col;
        double val;
    };
    std::vector<std::vector<RowEntry>> rows(static_cast<std::size_t>(n));
    std::vector<int> row_upwinded(static_cast<std::size_t>(n), 0);
    std::exception_ptr assembly_error;

    auto assemble_row = [&](int i, int j, std::vector<double>& amat_l,
                            std::vector<double>& bvec_l) {
        double xl[2] = {u.x(i), u.y(j)};
        prob.a.eval(xl, amat_l.data());
        prob.b.eval(xl, bvec_l.data());
        const double a11 = amat_l[0], a12 = 0.5 * (amat_l[1] + amat_l[2]), a22 = amat_l[3];
        const double me = min_eig_2x2(a11, a12, a22);
        if (!(me > 0.0)) throw std::runtime_error("elliptic solve: a not positive on grid");
        const double s = prob.a_scale;
        const double b1 = prob.b_scale * bvec_l[0], b2 = prob.b_scale * bvec_l[1];

        double cC = prob.lambda + 2.0 * s * (a11 + a22) * inv_h2;
        double cE = -s * a11 * inv_h2, cW = -s * a11 * inv_h2;
        double cN = -s * a22 * inv_h2, cS = -s * a22 * inv_h2;
        // mixed term 2 a12 u_xy by the 4-point stencil
        const double cx = s * 2.0 * a12 / (4.0 * h * h);
        double cNE = -cx, cSW = -cx, cNW = cx, cSE = cx;

        const double bn = std::sqrt(b1 * b1 + b2 * b2);
        const double peclet = bn * h / (2.0 * s * me);
        const long long row = idx(i, j);
        if (peclet > 1.0) {
            row_upwinded[static_cast<std::size_t>(row)] = 1;
            if (b1 > 0.0) {
                cC += b1 / h;
                cW += -b1 / h;
            } else {
                cC += -b1 / h;
                cE += b1 / h;
            }
            if (b2 > 0.0) {
                cC += b2 / h;
                cS += -b2 / h;
            } else {
                cC += -b2 / h;
                cN += b2 / h;
            }
        } else {
            cE += b1 / (2.0 * h);
            cW += -b1 / (2.0 * h);
            cN += b2 / (2.0 * h);
            cS += -b2 / (2.0 * h);
        }

        auto& slot = rows[static_cast<std::size_t>(row)];
        auto add = [&](int ii, int jj, double cval) {
            if (cval == 0.0) return;
            if (u.boundary(ii, jj)) return; // zero Dirichlet
            slot.push_back({idx(ii, jj), cval});
        };
        add(i, j, cC);
        add(i + 1, j, cE);
        add(i - 1, j, cW);
        add(i, j + 1, cN);
        add(i, j - 1, cS);
        add(i + 1, j + 1, cNE);
        add(i - 1, j - 1, cSW);
        add(i - 1, j + 1, cNW);
        add(i + 1, j - 1, cSE);
        rhs[row] = prob.f.eval(xl);
    };

#pragma omp parallel for schedule(static)
    for (int j = 1; j <= my; ++j) {
        std::vector<double> amat_l(d * d), bvec_l(d);
        for (int i = 1; i <= mx; ++i) {
            try {
                assemble_row(i, j, amat_l, bvec_l);
            } catch (...) {
#pragma omp critical
                if (!assembly_error) assembly_error = std::current_exception();
            }
        }
    }
    if (assembly_error) std::rethrow_exception(assembly_error);
    for (int v : row_upwinded) local.upwinded_nodes += v;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 9);
    for (long long r = 0; r < n; ++r)
        for (const auto& e : rows[static_cast<std::size_t>(r)])
            trips.emplace_back(r, e.col, e.val);

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.setMaxIterations(10000);
    solver.setTolerance(1e-12);
    solver.compute(A);
    Eigen::VectorXd sol = solver.solve(rhs);
    local.iterations = static_cast<int>(solver.iterations());
    const double rel = (A * sol - rhs).norm() / std::max(rhs.norm(), 1e-300);
    local.residual_rel = rel;
    if (solver.info() != Eigen::Success && rel > 1e-10) {
        std::ostringstream os;
        os << "elliptic solve: no convergence within budget (residual " << rel << ", "
           << local.iterations << " iterations)";
        throw std::runtime_error(os.str());
    }
    for (int j = 1; j <= my; ++j)
        for (int i = 1; i <= mx; ++i) u.at(i, j) = sol[idx(i, j)];
    if (info) *info = local;
    return u;
}

double localized_grid_norm(const GridFunction& u, double p, double center_spacing) {
    if (std::isinf(p)) return u.max_abs();
    const double vol = u.dims == 1 ? u.h : u.h * u.h;
    // centers on a sub-lattice covering the domain
    double best = 0.0;
    const double extent_x = -u.x0;
    const int ncx = static_cast<int>(std::floor(extent_x / center_spacing));
    const int ncy = u.dims == 2 ? ncx : 0;
    for (int cj = -ncy; cj <= ncy; ++cj)
        for (int ci = -ncx; ci <= ncx; ++ci) {
            const double zx = ci * center_spacing;
            const double zy = cj * center_spacing;
            double acc = 0.0;
            for (int j = 0; j < u.ny; ++j)
                for (int i = 0; i < u.nx; ++i) {
                    double rel[2] = {u.x(i) - zx, u.dims == 2 ? u.y(j) - zy : 0.0};
                    const double xi = bump_value(rel, u.dims);
                    if (xi == 0.0) continue;
                    acc += std::pow(xi * std::fabs(u.at(i, j)), p) * vol;
                }
            best = std::max(best, std::pow(acc, 1.0 / p));
        }
    return best;
}

std::vector<GridFunction> grid_gradient(const GridFunction& u) {
    std::vector<GridFunction> g(u.dims, u);
    const double inv2h = 1.0 / (2.0 * u.h);
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            double gx;
            if (i == 0) gx = (u.at(1, j) - u.at(0, j)) / u.h;
            else if (i == u.nx - 1) gx = (u.at(i, j) - u.at(i - 1, j)) / u.h;
            else gx = (u.at(i + 1, j) - u.at(i - 1, j)) * inv2h;
            g[0].at(i, j) = gx;
            if (u.dims == 2) {
                double gy;
                if (j == 0) gy = (u.at(i, 1) - u.at(i, 0)) / u.h;
                else if (j == u.ny - 1) gy = (u.at(i, j) - u.at(i, j - 1)) / u.h;
                else gy = (u.at(i, j + 1) - u.at(i, j - 1)) * inv2h;
                g[1].at(i, j) = gy;
            }
        }
    return g;
}

namespace {

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double xm = 0, ym = 0;
    for (std::size_t i = 0; i < n; ++i) {
        xm += std::log(xs[i]);
        ym += std::log(ys[i]);
    }
    xm /= n;
    ym /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(xs[i]) - xm;
        sxx += dx * dx;
        sxy += dx * (std::log(ys[i]) - ym);
    }
    return sxy / sxx;
}

} // namespace

AprioriReport verify_apriori(const EllipticProblem& tmpl, const std::vector<double>& lambda_sweep,
                             double p, double p_prime) {
    if (lambda_sweep.size() < 4)
        throw std::invalid_argument("verify_apriori: need >= 4 lambda values");
    const auto [lo, hi] = std::minmax_element(lambda_sweep.begin(), lambda_sweep.end());
    if (!(*hi / *lo >= 100.0))
        throw std::invalid_argument("verify_apriori: sweep must span >= 2 decades");

    AprioriReport rep;
    for (double lam : lambda_sweep) {
        EllipticProblem prob = tmpl;
        prob.lambda = lam;
        auto u = solve(prob);
        rep.lambdas.push_back(lam);
        rep.u_norm.push_back(localized_grid_norm(u, p_prime));
        auto g = grid_gradient(u);
        double gn;
        if (u.dims == 1) {
            gn = localized_grid_norm(g[0], p_prime);
        } else {
            GridFunction mag = g[0];
            for (std::size_t k = 0; k < mag.v.size(); ++k)
                mag.v[k] = std::sqrt(g[0].v[k] * g[0].v[k] + g[1].v[k] * g[1].v[k]);
            gn = localized_grid_norm(mag, p_prime);
        }
        rep.grad_norm.push_back(gn);
    }
    const double d = tmpl.dims;
    rep.paper_slope_u = -(2.0 + d / p_prime - d / p) / 2.0;
    rep.paper_slope_grad = -(1.0 + d / p_prime - d / p) / 2.0;
    rep.slope_u = fit_loglog_slope(rep.lambdas, rep.u_norm);
    rep.slope_grad = fit_loglog_slope(rep.lambdas, rep.grad_norm);
    rep.pass_u = rep.slope_u <= rep.paper_slope_u + 0.1;
    rep.pass_grad = rep.slope_grad <= rep.paper_slope_grad + 0.1;
    return rep;
}

void ZvonkinTransform::phi(const double* x, double* out) const {
    for (int l = 0; l < dims; ++l) out[l] = x[l] + U[l].interp(x);
}

void ZvonkinTransform::psi(const double* y, double* out, double tol, int max_iter) const {
    std::vector<double> x(y, y + dims), nx(dims), ph(dims);
    for (int it = 0; it < max_iter; ++it) {
        for (int l = 0; l < dims; ++l) nx[l] = y[l] - U[l].interp(x.data());
        for (int l = 0; l < dims; ++l) x[l] = nx[l];
        phi(x.data(), ph.data());
        double res = 0.0;
        for (int l = 0; l < dims; ++l) res = std::max(res, std::fabs(ph[l] - y[l]));
        if (res <= tol) {
            for (int l = 0; l < dims; ++l) out[l] = x[l];
            return;
        }
    }
    std::ostringstream os;
    os << "zvonkin: Psi iteration did not converge at (";
    for (int l = 0; l < dims; ++l) os << (l ? ", " : "") << y[l];
    os << ")";
    throw std::runtime_error(os.str());
}

ZvonkinTransform zvonkin_transform(const SdeModel& model, double lambda, double domain_radius,
                                   double h) {
    if (model.dim > 2)
        throw std::invalid_argument("zvonkin_transform: dims >= 3 rejected at configuration time");
    model.validate();
    const int d = model.dim;

    ZvonkinTransform z;
    z.dims = d;
    z.lambda = lambda;
    z.tilde_k1 = model.k1 / 4.0;
    z.tilde_k2 = 9.0 * model.k2 / 4.0;

    // a = sigma sigma^T as a matrix oracle
    MatrixField a = make_function_diffusion(
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

    // drift oracle b = b1 + b2
    VectorField bfull;
    bfull.dim = d;
    bfull.kind = "model_drift";
    bfull.eval = [&model](const double* x, double* out) { model.drift(x, out); };

    for (int l = 0; l < d; ++l) {
        EllipticProblem prob;
        prob.dims = d;
        prob.lambda = lambda;
        prob.a = a;
        prob.b = bfull;
        prob.a_scale = 0.5; // the transform system carries the 1/2 on a
        prob.b_scale = -1.0; // lambda u - (1/2) a d2 u - b.grad u = b^(l)
        prob.domain_radius = domain_radius;
        prob.h = h;
        const int comp = l;
        prob.f.dim = d;
        prob.f.eval = [&model, comp, d](const double* x) {
            std::vector<double> b(d);
            model.drift(x, b.data());
            return b[comp];
        };
        z.U.push_back(solve(prob));
    }

    z.gradU.resize(d);
    for (int l = 0; l < d; ++l) z.gradU[l] = grid_gradient(z.U[l]);

    const GridFunction& ref = z.U[0];
    std::vector<double> jac(d * d), jtj(d * d);
    for (int j = 0; j < ref.ny; ++j)
        for (int i = 0; i < ref.nx; ++i) {
            double mag2 = 0.0;
            for (int l = 0; l < d; ++l) mag2 += z.U[l].at(i, j) * z.U[l].at(i, j);
            z.sup_U = std::max(z.sup_U, std::sqrt(mag2));
            for (int l = 0; l < d; ++l)
                for (int m = 0; m < d; ++m) jac[l * d + m] = z.gradU[l][m].at(i, j);
            // spectral norm of jac via sym eigen of jac^T jac
            for (int l = 0; l < d; ++l)
                for (int m = 0; m < d; ++m) {
                    double acc = 0.0;
                    for (int k = 0; k < d; ++k) acc += jac[k * d + l] * jac[k * d + m];
                    jtj[l * d + m] = acc;
                }
            z.sup_gradU = std::max(z.sup_gradU, std::sqrt(symmetric_spectral_norm(jtj, d)));
        }
    z.certified = z.sup_U < 0.5 && z.sup_gradU < 0.5;

    // transformed coefficients on the y-grid
    z.b_tilde.assign(d, GridFunction(d, domain_radius, h));
    z.sigma_tilde.assign(d * d, GridFunction(d, domain_radius, h));
    std::vector<double> yv(2, 0.0), xv(2, 0.0), sig(d * d), dphi(d * d), st(d * d), sts(d * d);
    std::vector<double> eigs;
    z.ellipticity_min = std::numeric_limits<double>::infinity();
    z.ellipticity_max = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < ref.ny; ++j)
        for (int i = 0; i < ref.nx; ++i) {
            yv[0] = ref.x(i);
            yv[1] = d == 2 ? ref.y(j) : 0.0;
            z.psi(yv.data(), xv.data());
            {
                std::vector<double> ph(d);
                z.phi(xv.data(), ph.data());
                for (int l = 0; l < d; ++l)
                    z.psi_max_residual =
                        std::max(z.psi_max_residual, std::fabs(ph[l] - yv[l]));
            }
            for (int l = 0; l < d; ++l) z.b_tilde[l].at(i, j) = lambda * z.U[l].interp(xv.data());
            model.diffusion.eval(xv.data(), sig.data());
            for (int l = 0; l < d; ++l)
                for (int m = 0; m < d; ++m)
                    dphi[l * d + m] = (l == m ? 1.0 : 0.0) + z.gradU[l][m].interp(xv.data());
            for (int l = 0; l < d; ++l)
                for (int m = 0; m < d; ++m) {
                    double acc = 0.0;
                    for (int k = 0; k < d; ++k) acc += dphi[l * d + k] * sig[k * d + m];
                    st[l * d + m] = acc;
                }
            for (int l = 0; l < d; ++l)
                for (int m = 0; m < d; ++m) z.sigma_tilde[l * d + m].at(i, j) = st[l * d + m];
            for (int l = 0; l < d; ++l)
                for (int m = 0; m < d; ++m) {
                    double acc = 0.0;
                    for (int k = 0; k < d; ++k) acc += st[l * d + k] * st[m * d + k];
                    sts[l * d + m] = acc;
                }
            symmetric_eigenvalues(sts, d, eigs);
            for (double e : eigs) {
                z.ellipticity_min = std::min(z.ellipticity_min, e);
                z.ellipticity_max = std::max(z.ellipticity_max, e);
            }
        }

    for (int l = 0; l < d; ++l) {
        z.sup_b_tilde = std::max(z.sup_b_tilde, z.b_tilde[l].max_abs());
        for (const auto& g : grid_gradient(z.b_tilde[l]))
            z.sup_grad_b_tilde = std::max(z.sup_grad_b_tilde, g.max_abs());
    }
    return z;
}

void write_grid_binary(const std::string& path, const GridFunction& u) {
    TrajectoryRecord rec;
    rec.dim = u.dims + 1; // coordinates plus the sampled value
    rec.n_members = static_cast<std::int64_t>(u.nx) * u.ny;
    rec.stride = 0;
    std::vector<double> rows;
    rows.reserve(static_cast<std::size_t>(rec.n_members) * rec.dim);
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            rows.push_back(u.x(i));
            if (u.dims == 2) rows.push_back(u.y(j));
            rows.push_back(u.at(i, j));
        }
    rec.snapshot_times.push_back(0.0);
    rec.snapshots.push_back(std::move(rows));
    write_trajectory_binary(path, rec);
}

std::string grid_csv(const GridFunction& u) {
    CsvWriter csv(u.dims == 1 ? std::vector<std::string>{"x", "value"}
                              : std::vector<std::string>{"x", "y", "value"});
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            if (u.dims == 1)
                csv.row({format_double(u.x(i)), format_double(u.at(i, j))});
            else
                csv.row({format_double(u.x(i)), format_double(u.y(j)),
                         format_double(u.at(i, j))});
        }
    return csv.data;
}

} // namespace sdeflow
