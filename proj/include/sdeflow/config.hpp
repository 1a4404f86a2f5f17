#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sdeflow/constants.hpp"
#include "sdeflow/model.hpp"

namespace sdeflow {

// Declarative scenario config: model spec (field constructors + constants),
// base seed, output directory, calibration overrides and per-subcommand
// parameter blocks. Unknown keys are rejected; parse -> serialize -> parse is
// the identity.
struct ScenarioConfig {
    SdeModel model;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    int threads = -1;
    std::string format = "csv"; // csv | json
    CalibrationSet calibration;
    nlohmann::json subcommand_params = nlohmann::json::object();
    nlohmann::json model_json; // echo of the parsed model block

    ModelNorms norms() const;
};

ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
nlohmann::json serialize_config(const ScenarioConfig& c);

SdeModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const SdeModel& m);

} // namespace sdeflow
