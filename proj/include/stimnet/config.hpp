#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "stimnet/engine.hpp"

namespace stimnet {

// Experiment description loaded from a JSON config file. Explicit CLI
// flags override anything set here. Unknown keys are rejected.
struct ExperimentConfig {
    std::string dut = "comparator";
    unsigned width = 2;
    nlohmann::json coverage_model;  // null/"default" or a model object
    nlohmann::json constraints;     // null or {port: constraint} object
    EngineConfig engine;

    std::optional<std::string> log_path;
    std::optional<std::string> report_path;
    std::optional<std::string> model_path;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Resolve the JSON fragments once the dut is known.
CoverageModel resolve_coverage_model(const nlohmann::json& j, const DutSpec& spec);
ConstraintSet resolve_constraints(const nlohmann::json& j, const DutSpec& spec);

}  // namespace stimnet
