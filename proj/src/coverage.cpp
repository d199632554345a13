#include "stimnet/coverage.hpp"

#include <algorithm>
#include <stdexcept>

namespace stimnet {

namespace {

// Guard against accidentally huge models (e.g. a full cross of two wide
// ports); the tool targets desk-scale bin counts.
constexpr std::size_t kMaxTotalBins = std::size_t{1} << 22;

const PortSpec& source_port(const DutSpec& spec, const Coverpoint& cp) {
    const auto& ports = cp.side == PortSide::Input ? spec.inputs : spec.outputs;
    if (cp.port >= ports.size()) {
        throw std::invalid_argument("coverpoint " + cp.name + ": port index out of range");
    }
    return ports[cp.port];
}

std::uint64_t source_value(const Coverpoint& cp, const StimulusVector& stimulus,
                           const ResponseVector& response) {
    const auto& values = cp.side == PortSide::Input ? stimulus.values : response.values;
    if (cp.port >= values.size()) {
        throw std::invalid_argument("coverpoint " + cp.name + ": port index out of range");
    }
    return values[cp.port];
}

}  // namespace

bool ValueBin::contains(std::uint64_t v) const {
    if (!values.empty()) {
        return std::find(values.begin(), values.end(), v) != values.end();
    }
    return v >= lo && v <= hi;
}

void CoverageModel::validate(const DutSpec& spec) const {
    for (const auto& cp : coverpoints) {
        const PortSpec& port = source_port(spec, cp);
        if (cp.bins.empty()) {
            throw std::invalid_argument("coverpoint " + cp.name + ": no bins");
        }
        for (const auto& bin : cp.bins) {
            if (bin.values.empty() && bin.lo > bin.hi) {
                throw std::invalid_argument("coverpoint " + cp.name + ": bin lo > hi");
            }
        }
        // Every producible value must land in exactly one bin. Checked
        // exhaustively for narrow ports, which is all this tool drives.
        if (port.width <= 16) {
            for (std::uint64_t v = 0; v <= port.max_value(); ++v) {
                std::size_t matches = 0;
                for (const auto& bin : cp.bins) {
                    if (bin.contains(v)) ++matches;
                }
                if (matches != 1) {
                    throw std::invalid_argument(
                        "coverpoint " + cp.name + ": value " + std::to_string(v) + " matches " +
                        std::to_string(matches) + " bins (want exactly 1)");
                }
            }
        }
    }
    for (const auto& cross : crosses) {
        if (cross.points.size() < 2) {
            throw std::invalid_argument("cross " + cross.name + ": needs >= 2 coverpoints");
        }
        for (std::size_t idx : cross.points) {
            if (idx >= coverpoints.size()) {
                throw std::invalid_argument("cross " + cross.name +
                                            ": coverpoint index out of range");
            }
        }
    }
    if (total_bins() == 0) {
        throw std::invalid_argument("coverage model has no bins");
    }
    if (total_bins() > kMaxTotalBins) {
        throw std::invalid_argument("coverage model too large: " + std::to_string(total_bins()) +
                                    " bins");
    }
}

std::size_t CoverageModel::total_bins() const {
    std::size_t total = 0;
    for (const auto& cp : coverpoints) {
        if (cp.tracked) total += cp.bins.size();
    }
    for (const auto& cross : crosses) {
        std::size_t product = 1;
        for (std::size_t idx : cross.points) {
            product *= coverpoints[idx].bins.size();
        }
        total += product;
    }
    return total;
}

CoverageDatabase::CoverageDatabase(CoverageModel model, const DutSpec& spec)
    : model_(std::move(model)), spec_(spec) {
    spec_.validate();
    model_.validate(spec_);
    std::size_t offset = 0;
    for (const auto& cp : model_.coverpoints) {
        cp_offsets_.push_back(offset);
        if (cp.tracked) offset += cp.bins.size();
    }
    for (const auto& cross : model_.crosses) {
        cross_offsets_.push_back(offset);
        std::size_t product = 1;
        for (std::size_t idx : cross.points) {
            product *= model_.coverpoints[idx].bins.size();
        }
        offset += product;
    }
    hits_.assign(offset, 0);
}

std::size_t CoverageDatabase::bin_index_of(const Coverpoint& cp, const StimulusVector& stimulus,
                                           const ResponseVector& response) const {
    const std::uint64_t v = source_value(cp, stimulus, response);
    for (std::size_t i = 0; i < cp.bins.size(); ++i) {
        if (cp.bins[i].contains(v)) return i;
    }
    throw std::runtime_error("coverage model incomplete: coverpoint " + cp.name +
                             " has no bin for value " + std::to_string(v));
}

std::vector<std::size_t> CoverageDatabase::occupied(const StimulusVector& stimulus,
                                                    const ResponseVector& response) const {
    std::vector<std::size_t> member_index(model_.coverpoints.size());
    std::vector<std::size_t> ids;
    for (std::size_t c = 0; c < model_.coverpoints.size(); ++c) {
        const auto& cp = model_.coverpoints[c];
        member_index[c] = bin_index_of(cp, stimulus, response);
        if (cp.tracked) {
            ids.push_back(cp_offsets_[c] + member_index[c]);
        }
    }
    for (std::size_t x = 0; x < model_.crosses.size(); ++x) {
        std::size_t idx = 0;
        for (std::size_t point : model_.crosses[x].points) {
            idx = idx * model_.coverpoints[point].bins.size() + member_index[point];
        }
        ids.push_back(cross_offsets_[x] + idx);
    }
    return ids;
}

std::vector<std::size_t> CoverageDatabase::sample(const StimulusVector& stimulus,
                                                  const ResponseVector& response) {
    std::vector<std::size_t> newly;
    for (std::size_t id : occupied(stimulus, response)) {
        if (hits_[id]++ == 0) {
            newly.push_back(id);
            ++covered_;
        }
    }
    return newly;
}

double CoverageDatabase::coverage_fraction() const {
    return hits_.empty() ? 0.0 : static_cast<double>(covered_) / static_cast<double>(hits_.size());
}

std::vector<std::size_t> CoverageDatabase::uncovered() const {
    std::vector<std::size_t> holes;
    for (std::size_t i = 0; i < hits_.size(); ++i) {
        if (hits_[i] == 0) holes.push_back(i);
    }
    return holes;
}

std::vector<double> CoverageDatabase::encode_target(std::size_t bin_id) const {
    if (bin_id >= hits_.size()) {
        throw std::invalid_argument("bin id out of range");
    }
    std::vector<double> one_hot(hits_.size(), 0.0);
    one_hot[bin_id] = 1.0;
    return one_hot;
}

namespace {

Coverpoint per_value_coverpoint(const std::string& name, PortSide side, std::size_t port,
                                unsigned width, bool tracked = true) {
    Coverpoint cp;
    cp.name = name;
    cp.side = side;
    cp.port = port;
    cp.tracked = tracked;
    const std::uint64_t count = std::uint64_t{1} << width;
    cp.bins.reserve(count);
    for (std::uint64_t v = 0; v < count; ++v) {
        cp.bins.push_back(ValueBin{v, v, {}});
    }
    return cp;
}

}  // namespace

CoverageModel default_model(const DutSpec& spec) {
    CoverageModel model;
    if (spec.name == "comparator") {
        const unsigned w = spec.inputs[0].width;
        if (w > 11) {
            throw std::invalid_argument("default comparator model limited to width <= 11");
        }
        model.coverpoints.push_back(per_value_coverpoint("a", PortSide::Input, 0, w));
        model.coverpoints.push_back(per_value_coverpoint("b", PortSide::Input, 1, w));
        model.crosses.push_back(CrossSpec{"a_x_b", {0, 1}});
        return model;
    }
    if (spec.name == "alu") {
        const unsigned w = spec.inputs[1].width;
        if (w > 10) {
            throw std::invalid_argument("default alu model limited to width <= 10");
        }
        model.coverpoints.push_back(per_value_coverpoint("op", PortSide::Input, 0, 2));
        model.coverpoints.push_back(per_value_coverpoint("a", PortSide::Input, 1, w));
        model.coverpoints.push_back(per_value_coverpoint("b", PortSide::Input, 2, w));
        model.crosses.push_back(CrossSpec{"op_x_a", {0, 1}});
        return model;
    }
    throw std::invalid_argument("no default coverage model for dut " + spec.name);
}

namespace {

std::size_t find_coverpoint(const CoverageModel& model, const std::string& name) {
    for (std::size_t i = 0; i < model.coverpoints.size(); ++i) {
        if (model.coverpoints[i].name == name) return i;
    }
    throw std::invalid_argument("cross references unknown coverpoint " + name);
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
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

CoverageModel model_from_json(const nlohmann::json& j, const DutSpec& spec) {
    if (!j.is_object()) {
        throw std::invalid_argument("coverage model must be a JSON object");
    }
    reject_unknown_keys(j, {"coverpoints", "crosses"}, "coverage model");
    CoverageModel model;
    for (const auto& jcp : j.value("coverpoints", nlohmann::json::array())) {
        reject_unknown_keys(jcp, {"name", "source", "bins", "tracked"}, "coverpoint");
        Coverpoint cp;
        cp.name = jcp.at("name").get<std::string>();
        cp.tracked = jcp.value("tracked", true);
        const std::string source = jcp.at("source").get<std::string>();
        bool found = false;
        for (std::size_t i = 0; i < spec.inputs.size() && !found; ++i) {
            if (spec.inputs[i].name == source) {
                cp.side = PortSide::Input;
                cp.port = i;
                found = true;
            }
        }
        for (std::size_t i = 0; i < spec.outputs.size() && !found; ++i) {
            if (spec.outputs[i].name == source) {
                cp.side = PortSide::Output;
                cp.port = i;
                found = true;
            }
        }
        if (!found) {
            throw std::invalid_argument("coverpoint " + cp.name + ": unknown port " + source);
        }
        if (jcp.contains("bins")) {
            for (const auto& jbin : jcp.at("bins")) {
                reject_unknown_keys(jbin, {"lo", "hi", "values"}, "bin");
                ValueBin bin;
                if (jbin.contains("values")) {
                    bin.values = jbin.at("values").get<std::vector<std::uint64_t>>();
                } else {
                    bin.lo = jbin.at("lo").get<std::uint64_t>();
                    bin.hi = jbin.at("hi").get<std::uint64_t>();
                }
                cp.bins.push_back(std::move(bin));
            }
        } else {
            const PortSpec& port = source_port(spec, cp);
            if (port.width > 16) {
                throw std::invalid_argument("coverpoint " + cp.name +
                                            ": per-value bins need explicit bins above width 16");
            }
            for (std::uint64_t v = 0; v <= port.max_value(); ++v) {
                cp.bins.push_back(ValueBin{v, v, {}});
            }
        }
        model.coverpoints.push_back(std::move(cp));
    }
    for (const auto& jcross : j.value("crosses", nlohmann::json::array())) {
        reject_unknown_keys(jcross, {"name", "points"}, "cross");
        CrossSpec cross;
        cross.name = jcross.value("name", std::string{});
        for (const auto& point : jcross.at("points")) {
            cross.points.push_back(find_coverpoint(model, point.get<std::string>()));
        }
        if (cross.name.empty()) {
            for (std::size_t idx : cross.points) {
                cross.name += (cross.name.empty() ? "" : "_x_") + model.coverpoints[idx].name;
            }
        }
        model.crosses.push_back(std::move(cross));
    }
    model.validate(spec);
    return model;
}

nlohmann::json model_to_json(const CoverageModel& model, const DutSpec& spec) {
    nlohmann::json j;
    j["coverpoints"] = nlohmann::json::array();
    for (const auto& cp : model.coverpoints) {
        nlohmann::json jcp;
        jcp["name"] = cp.name;
        jcp["source"] = source_port(spec, cp).name;
        jcp["tracked"] = cp.tracked;
        jcp["bins"] = nlohmann::json::array();
        for (const auto& bin : cp.bins) {
            nlohmann::json jbin;
            if (!bin.values.empty()) {
                jbin["values"] = bin.values;
            } else {
                jbin["lo"] = bin.lo;
                jbin["hi"] = bin.hi;
            }
            jcp["bins"].push_back(std::move(jbin));
        }
        j["coverpoints"].push_back(std::move(jcp));
    }
    j["crosses"] = nlohmann::json::array();
    for (const auto& cross : model.crosses) {
        nlohmann::json jcross;
        jcross["name"] = cross.name;
        jcross["points"] = nlohmann::json::array();
        for (std::size_t idx : cross.points) {
            jcross["points"].push_back(model.coverpoints[idx].name);
        }
        j["crosses"].push_back(std::move(jcross));
    }
    return j;
}

}  // namespace stimnet
