#include "stimnet/config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace stimnet {

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end()) {
            throw std::invalid_argument("unknown key \"" + key + "\" in " + where);
        }
    }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("config must be a JSON object");
    }
    reject_unknown(j,
                   {"dut", "width", "coverage_model", "constraints", "engine", "network",
                    "outputs"},
                   "config");
    ExperimentConfig config;
    config.dut = j.value("dut", config.dut);
    config.width = j.value("width", config.width);
    if (j.contains("coverage_model")) config.coverage_model = j.at("coverage_model");
    if (j.contains("constraints")) config.constraints = j.at("constraints");

    if (j.contains("engine")) {
        const auto& je = j.at("engine");
        reject_unknown(je,
                       {"train_transactions", "iteration_cap", "retrain_interval",
                        "per_bin_model_attempts", "retrain_epochs", "goal", "seed", "bin_order"},
                       "engine");
        if (je.contains("train_transactions")) {
            config.engine.train_transactions = je.at("train_transactions").get<std::size_t>();
        }
        config.engine.iteration_cap = je.value("iteration_cap", config.engine.iteration_cap);
        config.engine.retrain_interval =
            je.value("retrain_interval", config.engine.retrain_interval);
        config.engine.per_bin_model_attempts =
            je.value("per_bin_model_attempts", config.engine.per_bin_model_attempts);
        config.engine.retrain_epochs = je.value("retrain_epochs", config.engine.retrain_epochs);
        config.engine.goal = je.value("goal", config.engine.goal);
        config.engine.base_seed = je.value("seed", config.engine.base_seed);
        if (je.contains("bin_order")) {
            const std::string order = je.at("bin_order").get<std::string>();
            if (order == "lowest") {
                config.engine.bin_order = BinOrder::LowestFirst;
            } else if (order == "random") {
                config.engine.bin_order = BinOrder::Random;
            } else {
                throw std::invalid_argument("bin_order must be \"lowest\" or \"random\"");
            }
        }
    }

    if (j.contains("network")) {
        const auto& jn = j.at("network");
        reject_unknown(jn, {"layers", "learning_rate", "epochs"}, "network");
        NetworkConfig net;
        net.layer_sizes = jn.at("layers").get<std::vector<std::size_t>>();
        net.learning_rate = jn.value("learning_rate", net.learning_rate);
        net.epochs = jn.value("epochs", net.epochs);
        config.engine.network = std::move(net);
    }

    if (j.contains("outputs")) {
        const auto& jo = j.at("outputs");
        reject_unknown(jo, {"log", "report", "model"}, "outputs");
        if (jo.contains("log")) config.log_path = jo.at("log").get<std::string>();
        if (jo.contains("report")) config.report_path = jo.at("report").get<std::string>();
        if (jo.contains("model")) config.model_path = jo.at("model").get<std::string>();
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open config " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return config_from_json(j);
}

CoverageModel resolve_coverage_model(const nlohmann::json& j, const DutSpec& spec) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "default")) {
        return default_model(spec);
    }
    return model_from_json(j, spec);
}

ConstraintSet resolve_constraints(const nlohmann::json& j, const DutSpec& spec) {
    ConstraintSet set;
    if (j.is_null()) return set;
    if (!j.is_object()) {
        throw std::invalid_argument("constraints must be a JSON object keyed by port name");
    }
    set.per_port.assign(spec.inputs.size(), Constraint::full_range());
    for (const auto& [port_name, jc] : j.items()) {
        auto it = std::find_if(spec.inputs.begin(), spec.inputs.end(),
                               [&](const PortSpec& p) { return p.name == port_name; });
        if (it == spec.inputs.end()) {
            throw std::invalid_argument("constraint names unknown input port " + port_name);
        }
        const std::size_t index = static_cast<std::size_t>(it - spec.inputs.begin());
        reject_unknown(jc, {"lo", "hi", "values"}, "constraint " + port_name);
        if (jc.contains("values")) {
            std::vector<WeightedValue> values;
            for (const auto& jv : jc.at("values")) {
                if (jv.is_array()) {
                    if (jv.size() != 2) {
                        throw std::invalid_argument("weighted value must be [value, weight]");
                    }
                    values.push_back({jv[0].get<std::uint64_t>(), jv[1].get<std::uint64_t>()});
                } else {
                    values.push_back({jv.get<std::uint64_t>(), 1});
                }
            }
            set.per_port[index] = Constraint::weighted(std::move(values));
        } else if (jc.contains("lo") || jc.contains("hi")) {
            const std::uint64_t lo = jc.value("lo", std::uint64_t{0});
            const std::uint64_t hi = jc.value("hi", spec.inputs[index].max_value());
            set.per_port[index] = Constraint::range(lo, hi);
        }
    }
    set.validate(spec);
    return set;
}

}  // namespace stimnet
