#include "sdeflow/fields.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace sdeflow {

json VectorField::spec() const { return spec_json; }
json MatrixField::spec() const { return spec_json; }

VectorField make_zero_field(int dim) {
    VectorField f;
    f.dim = dim;
    f.is_zero = true;
    f.kind = "zero";
    f.spec_json = json{{"kind", "zero"}};
    f.eval = [dim](const double*, double* out) {
        for (int i = 0; i < dim; ++i) out[i] = 0.0;
    };
    return f;
}

VectorField make_linear_field(int dim, double c) {
    VectorField f;
    f.dim = dim;
    f.kind = "linear";
    f.spec_json = json{{"kind", "linear"}, {"coefficient", c}};
    f.eval = [dim, c](const double* x, double* out) {
        for (int i = 0; i < dim; ++i) out[i] = c * x[i];
    };
    return f;
}

VectorField make_matrix_linear_field(int dim, const std::vector<double>& m) {
    if (static_cast<int>(m.size()) != dim * dim)
        throw std::invalid_argument("matrix_linear: need dim*dim entries");
    VectorField f;
    f.dim = dim;
    f.kind = "matrix_linear";
    f.spec_json = json{{"kind", "matrix_linear"}, {"matrix", m}};
    f.eval = [dim, m](const double* x, double* out) {
        for (int i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (int j = 0; j < dim; ++j) acc += m[i * dim + j] * x[j];
            out[i] = acc;
        }
    };
    return f;
}

VectorField make_constant_radial_field(int dim, double speed) {
    VectorField f;
    f.dim = dim;
    f.kind = "constant_radial";
    f.spec_json = json{{"kind", "constant_radial"}, {"speed", speed}};
    f.singular.points.push_back(std::vector<double>(dim, 0.0));
    f.eval = [dim, speed](const double* x, double* out) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        const double r = std::sqrt(r2);
        if (r == 0.0) {
            for (int i = 0; i < dim; ++i) out[i] = 0.0;
            return;
        }
        for (int i = 0; i < dim; ++i) out[i] = speed * x[i] / r;
    };
    return f;
}

// c*x/max(|x|,1): linear near the origin, constant speed |c| outside the unit
// ball. In 1-D with c = -1 this is clamp(-x, -1, 1).
VectorField make_clamp_linear_field(int dim, double c) {
    VectorField f;
    f.dim = dim;
    f.kind = "clamp_linear";
    f.spec_json = json{{"kind", "clamp_linear"}, {"coefficient", c}};
    f.eval = [dim, c](const double* x, double* out) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        const double s = std::max(std::sqrt(r2), 1.0);
        for (int i = 0; i < dim; ++i) out[i] = c * x[i] / s;
    };
    return f;
}

VectorField make_polynomial_field(int dim, const std::vector<std::vector<double>>& coeffs) {
    if (static_cast<int>(coeffs.size()) != dim)
        throw std::invalid_argument("polynomial: need one coefficient list per component");
    VectorField f;
    f.dim = dim;
    f.kind = "polynomial";
    f.spec_json = json{{"kind", "polynomial"}, {"coeffs", coeffs}};
    f.eval = [dim, coeffs](const double* x, double* out) {
        for (int i = 0; i < dim; ++i) {
            double acc = 0.0;
            // Horner in x_i
            for (auto it = coeffs[i].rbegin(); it != coeffs[i].rend(); ++it)
                acc = acc * x[i] + *it;
            out[i] = acc;
        }
    };
    return f;
}

VectorField make_bump_field(int dim, double height, double width, int axis) {
    if (axis < 0 || axis >= dim) throw std::invalid_argument("bump: axis out of range");
    VectorField f;
    f.dim = dim;
    f.kind = "bump";
    f.spec_json = json{{"kind", "bump"}, {"height", height}, {"width", width}, {"axis", axis}};
    f.eval = [dim, height, width, axis](const double* x, double* out) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        const double v = height * bump_profile(std::sqrt(r2) / width);
        for (int i = 0; i < dim; ++i) out[i] = (i == axis) ? v : 0.0;
    };
    return f;
}

VectorField make_power_singular_field(int dim, double q, int input_axis, int output_axis) {
    if (input_axis < 0 || input_axis >= dim || output_axis < 0 || output_axis >= dim)
        throw std::invalid_argument("power_singular: axis out of range");
    VectorField f;
    f.dim = dim;
    f.kind = "power_singular";
    f.spec_json = json{{"kind", "power_singular"},
                       {"q", q},
                       {"input_axis", input_axis},
                       {"output_axis", output_axis}};
    f.singular.hyperplanes.emplace_back(input_axis, 0.0);
    f.eval = [dim, q, input_axis, output_axis](const double* x, double* out) {
        for (int i = 0; i < dim; ++i) out[i] = 0.0;
        out[output_axis] = std::pow(std::fabs(x[input_axis]), -q);
    };
    return f;
}

// Drift of the degenerate-noise blow-up system: component 0 is |y|^-q of the
// second coordinate (0 at y = 0), component 1 is clamp(-y, -1, 1).
VectorField make_example25_drift(double q) {
    VectorField f;
    f.dim = 2;
    f.kind = "example25";
    f.spec_json = json{{"kind", "example25"}, {"q", q}};
    f.singular.hyperplanes.emplace_back(1, 0.0);
    f.eval = [q](const double* x, double* out) {
        const double y = x[1];
        out[0] = (y == 0.0) ? 0.0 : std::pow(std::fabs(y), -q);
        out[1] = std::min(std::max(-y, -1.0), 1.0);
    };
    return f;
}

VectorField make_sum_field(std::vector<VectorField> terms) {
    if (terms.empty()) throw std::invalid_argument("sum: no terms");
    const int dim = terms.front().dim;
    VectorField f;
    f.dim = dim;
    f.kind = "sum";
    json specs = json::array();
    bool all_zero = true;
    for (const auto& t : terms) {
        if (t.dim != dim) throw std::invalid_argument("sum: dimension mismatch");
        specs.push_back(t.spec_json);
        all_zero = all_zero && t.is_zero;
        for (const auto& p : t.singular.points) f.singular.points.push_back(p);
        for (const auto& h : t.singular.hyperplanes) f.singular.hyperplanes.push_back(h);
    }
    f.is_zero = all_zero;
    f.spec_json = json{{"kind", "sum"}, {"terms", specs}};
    auto shared = std::make_shared<std::vector<VectorField>>(std::move(terms));
    f.eval = [dim, shared](const double* x, double* out) {
        std::vector<double> tmp(dim);
        for (int i = 0; i < dim; ++i) out[i] = 0.0;
        for (const auto& t : *shared) {
            t.eval(x, tmp.data());
            for (int i = 0; i < dim; ++i) out[i] += tmp[i];
        }
    };
    return f;
}

MatrixField make_constant_matrix_diffusion(int dim, const std::vector<double>& m) {
    if (static_cast<int>(m.size()) != dim * dim)
        throw std::invalid_argument("constant_matrix: need dim*dim entries");
    MatrixField f;
    f.dim = dim;
    f.kind = "constant_matrix";
    f.is_constant = true;
    f.constant_value = m;
    f.spec_json = json{{"kind", "constant_matrix"}, {"matrix", m}};
    f.eval = [dim, m](const double*, double* out) {
        for (int i = 0; i < dim * dim; ++i) out[i] = m[i];
    };
    return f;
}

MatrixField make_scalar_diffusion(int dim, double epsilon) {
    std::vector<double> m(dim * dim, 0.0);
    for (int i = 0; i < dim; ++i) m[i * dim + i] = epsilon;
    MatrixField f = make_constant_matrix_diffusion(dim, m);
    f.kind = "scalar";
    f.spec_json = json{{"kind", "scalar"}, {"epsilon", epsilon}};
    return f;
}

MatrixField make_diagonal_diffusion(const std::vector<double>& entries) {
    const int dim = static_cast<int>(entries.size());
    std::vector<double> m(dim * dim, 0.0);
    for (int i = 0; i < dim; ++i) m[i * dim + i] = entries[i];
    MatrixField f = make_constant_matrix_diffusion(dim, m);
    f.kind = "diagonal";
    f.spec_json = json{{"kind", "diagonal"}, {"entries", entries}};
    return f;
}

MatrixField make_function_diffusion(int dim, std::function<void(const double*, double*)> fn,
                                    const std::string& kind) {
    MatrixField f;
    f.dim = dim;
    f.kind = kind;
    f.spec_json = json{{"kind", kind}};
    f.eval = std::move(fn);
    return f;
}

ScalarField make_constant_scalar(int dim, double value) {
    ScalarField f;
    f.dim = dim;
    f.kind = "constant";
    f.eval = [value](const double*) { return value; };
    return f;
}

ScalarField make_bump_scalar(int dim, double height, double width) {
    ScalarField f;
    f.dim = dim;
    f.kind = "bump";
    f.eval = [dim, height, width](const double* x) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        return height * bump_profile(std::sqrt(r2) / width);
    };
    return f;
}

ScalarField make_gaussian_scalar(int dim, double height, double width) {
    ScalarField f;
    f.dim = dim;
    f.kind = "gaussian";
    f.eval = [dim, height, width](const double* x) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        return height * std::exp(-r2 / (width * width));
    };
    return f;
}

namespace {

void require_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw std::invalid_argument("field config: unknown key '" + it.key() + "'");
    }
}

} // namespace

VectorField vector_field_from_json(int dim, const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") {
        require_keys(j, {"kind"});
        return make_zero_field(dim);
    }
    if (kind == "linear") {
        require_keys(j, {"kind", "coefficient"});
        return make_linear_field(dim, j.at("coefficient").get<double>());
    }
    if (kind == "matrix_linear") {
        require_keys(j, {"kind", "matrix"});
        return make_matrix_linear_field(dim, j.at("matrix").get<std::vector<double>>());
    }
    if (kind == "constant_radial") {
        require_keys(j, {"kind", "speed"});
        return make_constant_radial_field(dim, j.at("speed").get<double>());
    }
    if (kind == "clamp_linear") {
        require_keys(j, {"kind", "coefficient"});
        return make_clamp_linear_field(dim, j.at("coefficient").get<double>());
    }
    if (kind == "polynomial") {
        require_keys(j, {"kind", "coeffs"});
        return make_polynomial_field(dim, j.at("coeffs").get<std::vector<std::vector<double>>>());
    }
    if (kind == "bump") {
        require_keys(j, {"kind", "height", "width", "axis"});
        return make_bump_field(dim, j.at("height").get<double>(), j.at("width").get<double>(),
                               j.value("axis", 0));
    }
    if (kind == "power_singular") {
        require_keys(j, {"kind", "q", "input_axis", "output_axis"});
        return make_power_singular_field(dim, j.at("q").get<double>(), j.value("input_axis", 0),
                                         j.value("output_axis", 0));
    }
    if (kind == "example25") {
        require_keys(j, {"kind", "q"});
        if (dim != 2) throw std::invalid_argument("example25 drift requires dim == 2");
        return make_example25_drift(j.at("q").get<double>());
    }
    if (kind == "sum") {
        require_keys(j, {"kind", "terms"});
        std::vector<VectorField> terms;
        for (const auto& t : j.at("terms")) terms.push_back(vector_field_from_json(dim, t));
        return make_sum_field(std::move(terms));
    }
    throw std::invalid_argument("unknown vector field kind '" + kind + "'");
}

MatrixField matrix_field_from_json(int dim, const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant_matrix") {
        require_keys(j, {"kind", "matrix"});
        return make_constant_matrix_diffusion(dim, j.at("matrix").get<std::vector<double>>());
    }
    if (kind == "scalar") {
        require_keys(j, {"kind", "epsilon"});
        return make_scalar_diffusion(dim, j.at("epsilon").get<double>());
    }
    if (kind == "diagonal") {
        require_keys(j, {"kind", "entries"});
        return make_diagonal_diffusion(j.at("entries").get<std::vector<double>>());
    }
    throw std::invalid_argument("unknown diffusion kind '" + kind + "'");
}

ScalarField scalar_field_from_json(int dim, const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        require_keys(j, {"kind", "value"});
        return make_constant_scalar(dim, j.at("value").get<double>());
    }
    if (kind == "bump") {
        require_keys(j, {"kind", "height", "width"});
        return make_bump_scalar(dim, j.at("height").get<double>(), j.value("width", 1.0));
    }
    if (kind == "gaussian") {
        require_keys(j, {"kind", "height", "width"});
        return make_gaussian_scalar(dim, j.at("height").get<double>(), j.value("width", 1.0));
    }
    throw std::invalid_argument("unknown scalar field kind '" + kind + "'");
}

} // namespace sdeflow
