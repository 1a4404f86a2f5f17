#include "sdeflow/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sdeflow {

void SdeModel::validate() const {
    if (dim < 1) throw std::invalid_argument("model: dim must be >= 1");
    if (!(k1 > 0.0) || !(k2 >= k1))
        throw std::invalid_argument("model: need 0 < K1 <= K2");
    if (!(p > 2.0 * dim)) throw std::invalid_argument("model: need p > 2d");
    if (!(rho > 2.0 * dim)) throw std::invalid_argument("model: need rho > 2d");
    if (drift_b1.dim != dim || drift_b2.dim != dim || diffusion.dim != dim)
        throw std::invalid_argument("model: field dimensions disagree with dim");
}

void SdeModel::drift(const double* x, double* out) const {
    drift_b1.eval(x, out);
    std::vector<double> tmp(dim);
    drift_b2.eval(x, tmp.data());
    for (int i = 0; i < dim; ++i) out[i] += tmp[i];
}

double SdeModel::singular_distance(const double* x) const {
    double d = std::numeric_limits<double>::infinity();
    if (!drift_b1.singular.empty()) d = std::min(d, drift_b1.singular.distance(x, dim));
    if (!drift_b2.singular.empty()) d = std::min(d, drift_b2.singular.distance(x, dim));
    return d;
}

NormWindow lattice_window(int dim, double extent, double spacing, int cells_per_axis) {
    NormWindow w;
    w.cells_per_axis = cells_per_axis;
    const int n = static_cast<int>(std::floor(extent / spacing));
    std::vector<int> idx(dim, -n);
    while (true) {
        std::vector<double> z(dim);
        for (int i = 0; i < dim; ++i) z[i] = idx[i] * spacing;
        w.centers.push_back(z);
        int i = 0;
        for (; i < dim; ++i) {
            if (++idx[i] <= n) break;
            idx[i] = -n;
        }
        if (i == dim) break;
    }
    return w;
}

namespace {

struct NormIntegrand {
    int dim;
    const SingularSet* singular;
    std::function<double(const double*)> absval; // |f(x)|, already nonnegative
};

void check_finite(double v, const double* x, int dim) {
    if (std::isfinite(v)) return;
    std::ostringstream os;
    os << "localized_lp_norm: non-finite field value at (";
    for (int i = 0; i < dim; ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    throw std::runtime_error(os.str());
}

// Recursive midpoint integration of |xi(x-z) f(x)|^p over an axis-aligned
// cell, refining near the declared singular set and excluding the 1e-6 ball.
double integrate_cell(const NormIntegrand& g, const std::vector<double>& z,
                      std::vector<double>& center, double half, double p, int depth,
                      int max_depth, double exclusion) {
    const int dim = g.dim;
    const double diag = half * std::sqrt(static_cast<double>(dim));

    // prune cells entirely outside the kernel support around z
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = center[i] - z[i];
        r2 += d * d;
    }
    if (std::sqrt(r2) - diag > 1.0) return 0.0;

    if (g.singular) {
        const double sd = g.singular->distance(center.data(), dim);
        if (sd + diag < exclusion) return 0.0; // entirely inside the exclusion ball
        if (sd < 4.0 * diag && depth < max_depth) {
            // split into 2^dim children
            double sum = 0.0;
            const double h2 = half / 2.0;
            const int children = 1 << dim;
            for (int c = 0; c < children; ++c) {
                std::vector<double> cc(center);
                for (int i = 0; i < dim; ++i) cc[i] += ((c >> i) & 1) ? h2 : -h2;
                sum += integrate_cell(g, z, cc, h2, p, depth + 1, max_depth, exclusion);
            }
            return sum;
        }
        if (sd < exclusion) return 0.0; // deepest level, midpoint inside exclusion
    }

    std::vector<double> rel(dim);
    for (int i = 0; i < dim; ++i) rel[i] = center[i] - z[i];
    const double xi = bump_value(rel.data(), dim);
    if (xi == 0.0) return 0.0;
    const double v = g.absval(center.data());
    check_finite(v, center.data(), dim);
    double vol = 1.0;
    for (int i = 0; i < dim; ++i) vol *= 2.0 * half;
    return std::pow(xi * v, p) * vol;
}

double sup_cell(const NormIntegrand& g, const std::vector<double>& z, std::vector<double>& center,
                double half, int depth, int max_depth, double exclusion) {
    const int dim = g.dim;
    const double diag = half * std::sqrt(static_cast<double>(dim));
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = center[i] - z[i];
        r2 += d * d;
    }
    if (std::sqrt(r2) - diag > 1.0) return 0.0;
    if (g.singular) {
        const double sd = g.singular->distance(center.data(), dim);
        if (sd + diag < exclusion) return 0.0;
        if (sd < 4.0 * diag && depth < max_depth) {
            double best = 0.0;
            const double h2 = half / 2.0;
            const int children = 1 << dim;
            for (int c = 0; c < children; ++c) {
                std::vector<double> cc(center);
                for (int i = 0; i < dim; ++i) cc[i] += ((c >> i) & 1) ? h2 : -h2;
                best = std::max(best, sup_cell(g, z, cc, h2, depth + 1, max_depth, exclusion));
            }
            return best;
        }
        if (sd < exclusion) return 0.0;
    }
    std::vector<double> rel(dim);
    for (int i = 0; i < dim; ++i) rel[i] = center[i] - z[i];
    const double xi = bump_value(rel.data(), dim);
    if (xi == 0.0) return 0.0;
    const double v = g.absval(center.data());
    check_finite(v, center.data(), dim);
    return xi * v;
}

double norm_for_center(const NormIntegrand& g, const std::vector<double>& z, double p,
                       const NormWindow& w) {
    const int dim = g.dim;
    const int n = w.cells_per_axis;
    const double half = 1.0 / n; // cells of side 2/n over [z-1, z+1]
    std::vector<int> idx(dim, 0);
    double acc = 0.0;
    while (true) {
        std::vector<double> center(dim);
        for (int i = 0; i < dim; ++i) center[i] = z[i] - 1.0 + (2.0 * idx[i] + 1.0) * half;
        if (std::isinf(p))
            acc = std::max(acc, sup_cell(g, z, center, half, 0, w.max_refine_depth,
                                         w.exclusion_radius));
        else
            acc += integrate_cell(g, z, center, half, p, 0, w.max_refine_depth,
                                  w.exclusion_radius);
        int i = 0;
        for (; i < dim; ++i) {
            if (++idx[i] < n) break;
            idx[i] = 0;
        }
        if (i == dim) break;
    }
    return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

double localized_norm_impl(const NormIntegrand& g, double p, const NormWindow& w) {
    if (w.centers.empty()) throw std::invalid_argument("localized_lp_norm: empty center lattice");
    if (!(p >= 1.0)) throw std::invalid_argument("localized_lp_norm: need p >= 1");
    const int n = static_cast<int>(w.centers.size());
    std::vector<double> vals(n);
    std::exception_ptr error;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        try {
            vals[i] = norm_for_center(g, w.centers[i], p, w);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    // deterministic fixed-order max reduction
    double best = 0.0;
    for (int i = 0; i < n; ++i) best = std::max(best, vals[i]);
    return best;
}

} // namespace

double localized_lp_norm(const ScalarField& f, double p, const NormWindow& w) {
    NormIntegrand g;
    g.dim = f.dim;
    g.singular = f.singular.empty() ? nullptr : &f.singular;
    g.absval = [&f](const double* x) { return std::fabs(f.eval(x)); };
    return localized_norm_impl(g, p, w);
}

double localized_lp_norm(const VectorField& f, double p, const NormWindow& w) {
    NormIntegrand g;
    g.dim = f.dim;
    g.singular = f.singular.empty() ? nullptr : &f.singular;
    g.absval = [&f](const double* x) {
        std::vector<double> out(f.dim);
        f.eval(x, out.data());
        double r2 = 0.0;
        for (double v : out) r2 += v * v;
        return std::sqrt(r2);
    };
    return localized_norm_impl(g, p, w);
}

std::vector<std::vector<double>> unit_directions(int dim, int count) {
    std::vector<std::vector<double>> dirs;
    dirs.reserve(count);
    if (dim == 1) {
        for (int i = 0; i < count; ++i) dirs.push_back({i % 2 == 0 ? 1.0 : -1.0});
        return dirs;
    }
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = 2.0 * M_PI * i / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    if (dim == 3) {
        // Fibonacci sphere
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double zc = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
            const double th = ga * i;
            dirs.push_back({r * std::cos(th), r * std::sin(th), zc});
        }
        return dirs;
    }
    throw std::invalid_argument("unit_directions: dim > 3 not supported");
}

EllipticityReport probe_ellipticity(const SdeModel& model,
                                    const std::vector<std::vector<double>>& sample,
                                    int directions_per_point, double tolerance) {
    if (sample.empty()) throw std::invalid_argument("probe_ellipticity: empty sample");
    const int d = model.dim;
    EllipticityReport rep;
    rep.k1_hat = std::numeric_limits<double>::infinity();
    rep.k2_hat = -std::numeric_limits<double>::infinity();
    const auto dirs = unit_directions(d, std::max(1, directions_per_point));
    std::vector<double> sigma(d * d), a(d * d), az(d);
    for (const auto& x : sample) {
        model.diffusion.eval(x.data(), sigma.data());
        // a = sigma sigma^T
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double acc = 0.0;
                for (int k = 0; k < d; ++k) acc += sigma[i * d + k] * sigma[j * d + k];
                a[i * d + j] = acc;
            }
        for (const auto& z : dirs) {
            double ray = 0.0;
            for (int i = 0; i < d; ++i) {
                double acc = 0.0;
                for (int j = 0; j < d; ++j) acc += a[i * d + j] * z[j];
                az[i] = acc;
                ray += acc * z[i];
            }
            if (!std::isfinite(ray)) {
                rep.violations.push_back({x, z, ray});
                continue;
            }
            rep.k1_hat = std::min(rep.k1_hat, ray);
            rep.k2_hat = std::max(rep.k2_hat, ray);
            if (ray < model.k1 - tolerance || ray > model.k2 + tolerance)
                rep.violations.push_back({x, z, ray});
        }
    }
    return rep;
}

void symmetric_eigenvalues(const std::vector<double>& m, int dim, std::vector<double>& eigs) {
    // cyclic Jacobi; dims here are tiny (<= 3 in practice)
    std::vector<double> a(m);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) off += a[i * dim + j] * a[i * dim + j];
        if (off < 1e-30) break;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) {
                const double apq = a[i * dim + j];
                if (apq == 0.0) continue;
                const double app = a[i * dim + i], aqq = a[j * dim + j];
                const double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < dim; ++k) {
                    const double aik = a[i * dim + k], ajk = a[j * dim + k];
                    a[i * dim + k] = c * aik - s * ajk;
                    a[j * dim + k] = s * aik + c * ajk;
                }
                for (int k = 0; k < dim; ++k) {
                    const double aki = a[k * dim + i], akj = a[k * dim + j];
                    a[k * dim + i] = c * aki - s * akj;
                    a[k * dim + j] = s * aki + c * akj;
                }
            }
    }
    eigs.resize(dim);
    for (int i = 0; i < dim; ++i) eigs[i] = a[i * dim + i];
}

double symmetric_spectral_norm(const std::vector<double>& m, int dim) {
    std::vector<double> eigs;
    symmetric_eigenvalues(m, dim, eigs);
    double best = 0.0;
    for (double e : eigs) best = std::max(best, std::fabs(e));
    return best;
}

HolderEstimate holder_modulus_a(
    const SdeModel& model,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs) {
    if (!(model.rho > model.dim))
        throw std::invalid_argument("holder_modulus_a: need rho > d");
    const int d = model.dim;
    const double expo = 1.0 - d / model.rho;
    HolderEstimate est;
    std::vector<double> sx(d * d), sy(d * d), ax(d * d), ay(d * d), diff(d * d);
    auto to_a = [d](const std::vector<double>& s, std::vector<double>& a) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double acc = 0.0;
                for (int k = 0; k < d; ++k) acc += s[i * d + k] * s[j * d + k];
                a[i * d + j] = acc;
            }
    };
    for (const auto& [x, y] : pairs) {
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double dd = x[i] - y[i];
            r2 += dd * dd;
        }
        const double r = std::sqrt(r2);
        if (r > 1.0 || r == 0.0) {
            ++est.pairs_skipped;
            continue;
        }
        model.diffusion.eval(x.data(), sx.data());
        model.diffusion.eval(y.data(), sy.data());
        to_a(sx, ax);
        to_a(sy, ay);
        for (int i = 0; i < d * d; ++i) diff[i] = ax[i] - ay[i];
        const double num = symmetric_spectral_norm(diff, d);
        est.omega_hat = std::max(est.omega_hat, num / std::pow(r, expo));
        ++est.pairs_used;
    }
    return est;
}

namespace {

ShellEstimate shell_extremum(const SdeModel& model, double r, double shell_cap, int samples,
                             bool want_sup, double correction) {
    if (!(r >= 1.0)) throw std::invalid_argument("shell estimate: need r >= 1");
    if (!(shell_cap > r)) throw std::invalid_argument("shell estimate: need shell_cap > r");
    if (samples < 1) throw std::invalid_argument("shell estimate: need samples >= 1");
    const int d = model.dim;
    // stratify: ~sqrt(samples) radii x directions
    const int n_r = std::max(1, static_cast<int>(std::round(std::sqrt(double(samples)))));
    const int n_dir = std::max(1, (samples + n_r - 1) / n_r);
    const auto dirs = unit_directions(d, n_dir);
    std::vector<double> x(d), b(d);
    double best = want_sup ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    ShellEstimate est;
    for (int ir = 0; ir < n_r; ++ir) {
        const double rad = r + (shell_cap - r) * (n_r == 1 ? 0.0 : double(ir) / (n_r - 1));
        for (const auto& u : dirs) {
            for (int i = 0; i < d; ++i) x[i] = rad * u[i];
            model.drift_b2.eval(x.data(), b.data());
            double radial = 0.0;
            for (int i = 0; i < d; ++i) radial += u[i] * b[i];
            if (!std::isfinite(radial))
                throw std::runtime_error("shell estimate: non-finite b2 on shell");
            best = want_sup ? std::max(best, radial) : std::min(best, radial);
            ++est.samples;
        }
    }
    est.value = best + correction;
    est.shell_cap = shell_cap;
    return est;
}

} // namespace

ShellEstimate beta_star(const SdeModel& model, double r, double shell_cap, int samples) {
    const double corr = (model.dim - 1) * model.k2 / (2.0 * r);
    return shell_extremum(model, r, shell_cap, samples, /*want_sup=*/true, corr);
}

ShellEstimate beta_lower(const SdeModel& model, double r, double shell_cap, int samples) {
    return shell_extremum(model, r, shell_cap, samples, /*want_sup=*/false, 0.0);
}

} // namespace sdeflow
