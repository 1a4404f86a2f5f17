#include "sdeflow/config.hpp"

#include <cmath>
#include <stdexcept>

#include "sdeflow/io.hpp"

namespace sdeflow {

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok)
            throw std::invalid_argument(std::string(where) + ": unknown key '" + it.key() + "'");
    }
}

} // namespace

SdeModel model_from_json(const nlohmann::json& j) {
    reject_unknown(j,
                   {"dim", "k1", "k2", "p", "rho", "drift_b1", "drift_b2", "diffusion", "norms"},
                   "model");
    SdeModel m;
    m.dim = j.at("dim").get<int>();
    m.k1 = j.at("k1").get<double>();
    m.k2 = j.at("k2").get<double>();
    m.p = j.at("p").get<double>();
    m.rho = j.at("rho").get<double>();
    m.drift_b1 = j.contains("drift_b1") ? vector_field_from_json(m.dim, j.at("drift_b1"))
                                        : make_zero_field(m.dim);
    m.drift_b2 = j.contains("drift_b2") ? vector_field_from_json(m.dim, j.at("drift_b2"))
                                        : make_zero_field(m.dim);
    m.diffusion = matrix_field_from_json(m.dim, j.at("diffusion"));
    if (j.contains("norms")) {
        const auto& n = j.at("norms");
        reject_unknown(n, {"b", "b1", "b2", "grad_sigma", "sigma_sup"}, "model.norms");
        if (n.contains("b")) m.norm_b = n.at("b").get<double>();
        if (n.contains("b1")) m.norm_b1 = n.at("b1").get<double>();
        if (n.contains("b2")) m.norm_b2 = n.at("b2").get<double>();
        if (n.contains("grad_sigma")) m.norm_grad_sigma = n.at("grad_sigma").get<double>();
        if (n.contains("sigma_sup")) m.sigma_sup = n.at("sigma_sup").get<double>();
    }
    m.validate();
    return m;
}

nlohmann::json model_to_json(const SdeModel& m) {
    nlohmann::json j;
    j["dim"] = m.dim;
    j["k1"] = m.k1;
    j["k2"] = m.k2;
    j["p"] = m.p;
    j["rho"] = m.rho;
    j["drift_b1"] = m.drift_b1.spec_json;
    j["drift_b2"] = m.drift_b2.spec_json;
    j["diffusion"] = m.diffusion.spec_json;
    nlohmann::json n = nlohmann::json::object();
    if (!std::isnan(m.norm_b)) n["b"] = m.norm_b;
    if (!std::isnan(m.norm_b1)) n["b1"] = m.norm_b1;
    if (!std::isnan(m.norm_b2)) n["b2"] = m.norm_b2;
    if (!std::isnan(m.norm_grad_sigma)) n["grad_sigma"] = m.norm_grad_sigma;
    if (!std::isnan(m.sigma_sup)) n["sigma_sup"] = m.sigma_sup;
    if (!n.empty()) j["norms"] = n;
    return j;
}

ModelNorms ScenarioConfig::norms() const {
    ModelNorms n;
    n.d = model.dim;
    n.p = model.p;
    n.rho = model.rho;
    n.k1 = model.k1;
    n.k2 = model.k2;
    auto need = [](double v, const char* what) {
        if (std::isnan(v))
            throw std::invalid_argument(std::string("constants need declared norm ") + what);
        return v;
    };
    n.norm_b = need(model.norm_b, "norms.b");
    n.norm_b1 = std::isnan(model.norm_b1) ? 0.0 : model.norm_b1;
    n.norm_b2 = std::isnan(model.norm_b2) ? 0.0 : model.norm_b2;
    n.norm_grad_sigma = need(model.norm_grad_sigma, "norms.grad_sigma");
    n.sigma_sup = need(model.sigma_sup, "norms.sigma_sup");
    return n;
}

ScenarioConfig parse_config(const nlohmann::json& j) {
    reject_unknown(j, {"model", "seed", "out", "threads", "format", "calibration", "params"},
                   "config");
    ScenarioConfig c;
    c.model = model_from_json(j.at("model"));
    c.model_json = model_to_json(c.model);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("format")) {
        c.format = j.at("format").get<std::string>();
        if (c.format != "csv" && c.format != "json")
            throw std::invalid_argument("config: format must be csv or json");
    }
    if (j.contains("calibration")) c.calibration = calibration_from_json(j.at("calibration"));
    if (j.contains("params")) c.subcommand_params = j.at("params");
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    return parse_config(nlohmann::json::parse(read_file(path)));
}

nlohmann::json serialize_config(const ScenarioConfig& c) {
    nlohmann::json j;
    j["model"] = model_to_json(c.model);
    j["seed"] = c.seed;
    j["out"] = c.out_dir;
    j["threads"] = c.threads;
    j["format"] = c.format;
    j["calibration"] = calibration_to_json(c.calibration);
    j["params"] = c.subcommand_params;
    return j;
}

} // namespace sdeflow
