#include "stimnet/dut.hpp"

#include <set>
#include <stdexcept>

namespace stimnet {

namespace {

std::uint64_t width_mask(unsigned width) {
    return width >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1);
}

void check_operand(std::uint64_t v, unsigned width, const char* name) {
    if (width < 1 || width > 64) {
        throw std::invalid_argument("port width must be in 1..64");
    }
    if (v > width_mask(width)) {
        throw std::invalid_argument(std::string(name) + " exceeds port width");
    }
}

}  // namespace

std::uint64_t PortSpec::max_value() const {
    return width_mask(width);
}

void DutSpec::validate() const {
    if (inputs.empty() || outputs.empty()) {
        throw std::invalid_argument("dut needs at least one input and one output port");
    }
    std::set<std::string> names;
    auto check_port = [&](const PortSpec& p, Direction dir) {
        if (p.width < 1 || p.width > 64) {
            throw std::invalid_argument("port " + p.name + ": width must be in 1..64");
        }
        if (p.direction != dir) {
            throw std::invalid_argument("port " + p.name + ": direction mismatch");
        }
        if (!names.insert(p.name).second) {
            throw std::invalid_argument("duplicate port name " + p.name);
        }
    };
    for (const auto& p : inputs) check_port(p, Direction::In);
    for (const auto& p : outputs) check_port(p, Direction::Out);
}

ResponseVector comparator_eval(std::uint64_t a, std::uint64_t b, unsigned width) {
    check_operand(a, width, "a");
    check_operand(b, width, "b");
    std::uint64_t result = a > b ? kCompareGt : (a == b ? kCompareEq : kCompareLt);
    return ResponseVector{{result}};
}

std::uint64_t golden_alu_eval(unsigned op, std::uint64_t a, std::uint64_t b, unsigned width) {
    check_operand(a, width, "a");
    check_operand(b, width, "b");
    const std::uint64_t mask = width_mask(width);
    switch (op) {
        case kAluAdd: return (a + b) & mask;
        case kAluSub: return (a - b) & mask;
        case kAluAnd: return a & b;
        case kAluOr: return a | b;
        default: throw std::invalid_argument("invalid ALU opcode");
    }
}

std::uint64_t buggy_alu_eval(unsigned op, std::uint64_t a, std::uint64_t b, unsigned width) {
    std::uint64_t result = golden_alu_eval(op, a, b, width);
    if (op == kAluSub && a == b) {
        return 1;  // injected defect: x - x reads back as 1
    }
    return result;
}

TestStatus check(const ResponseVector& dut_response, const ResponseVector& golden_response) {
    if (dut_response.values.size() != golden_response.values.size()) {
        throw std::invalid_argument("response port counts differ");
    }
    return dut_response.values == golden_response.values ? TestStatus::Pass : TestStatus::Fail;
}

Dut::Dut(DutSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
}

void Dut::check_stimulus(const StimulusVector& stimulus) const {
    if (stimulus.values.size() != spec_.inputs.size()) {
        throw std::invalid_argument("stimulus port count does not match dut " + spec_.name);
    }
    for (std::size_t i = 0; i < stimulus.values.size(); ++i) {
        if (stimulus.values[i] > spec_.inputs[i].max_value()) {
            throw std::invalid_argument("stimulus value exceeds width of port " +
                                        spec_.inputs[i].name);
        }
    }
}

namespace {

DutSpec comparator_spec(unsigned width) {
    DutSpec spec;
    spec.name = "comparator";
    spec.inputs = {{"a", width, Direction::In}, {"b", width, Direction::In}};
    spec.outputs = {{"result", 2, Direction::Out}};
    return spec;
}

DutSpec alu_spec(unsigned width) {
    DutSpec spec;
    spec.name = "alu";
    spec.inputs = {{"op", 2, Direction::In},
                   {"a", width, Direction::In},
                   {"b", width, Direction::In}};
    spec.outputs = {{"result", width, Direction::Out}};
    return spec;
}

}  // namespace

ComparatorDut::ComparatorDut(unsigned width) : Dut(comparator_spec(width)) {}

ResponseVector ComparatorDut::eval(const StimulusVector& stimulus) const {
    check_stimulus(stimulus);
    return comparator_eval(stimulus.values[0], stimulus.values[1], spec().inputs[0].width);
}

ResponseVector ComparatorDut::golden(const StimulusVector& stimulus) const {
    return eval(stimulus);
}

AluDut::AluDut(unsigned width, bool inject_bug) : Dut(alu_spec(width)), inject_bug_(inject_bug) {}

ResponseVector AluDut::eval(const StimulusVector& stimulus) const {
    check_stimulus(stimulus);
    const unsigned width = spec().inputs[1].width;
    const unsigned op = static_cast<unsigned>(stimulus.values[0]);
    const std::uint64_t a = stimulus.values[1];
    const std::uint64_t b = stimulus.values[2];
    return ResponseVector{
        {inject_bug_ ? buggy_alu_eval(op, a, b, width) : golden_alu_eval(op, a, b, width)}};
}

ResponseVector AluDut::golden(const StimulusVector& stimulus) const {
    check_stimulus(stimulus);
    const unsigned width = spec().inputs[1].width;
    return ResponseVector{{golden_alu_eval(static_cast<unsigned>(stimulus.values[0]),
                                           stimulus.values[1], stimulus.values[2], width)}};
}

std::unique_ptr<Dut> make_dut(const std::string& name, unsigned width) {
    if (name == "comparator") {
        return std::make_unique<ComparatorDut>(width);
    }
    if (name == "alu") {
        return std::make_unique<AluDut>(width, /*inject_bug=*/true);
    }
    throw std::invalid_argument("unknown dut: " + name);
}

unsigned input_bit_count(const DutSpec& spec) {
    unsigned bits = 0;
    for (const auto& p : spec.inputs) bits += p.width;
    return bits;
}

std::vector<double> stimulus_bits(const DutSpec& spec, const StimulusVector& stimulus) {
    if (stimulus.values.size() != spec.inputs.size()) {
        throw std::invalid_argument("stimulus port count does not match dut spec");
    }
    std::vector<double> bits;
    bits.reserve(input_bit_count(spec));
    for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
        const unsigned w = spec.inputs[i].width;
        for (unsigned k = 0; k < w; ++k) {
            bits.push_back(static_cast<double>((stimulus.values[i] >> (w - 1 - k)) & 1));
        }
    }
    return bits;
}

StimulusVector stimulus_from_bits(const DutSpec& spec, const std::vector<bool>& bits) {
    if (bits.size() != input_bit_count(spec)) {
        throw std::invalid_argument("bit count does not match dut input width");
    }
    StimulusVector stimulus;
    std::size_t pos = 0;
    for (const auto& port : spec.inputs) {
        std::uint64_t v = 0;
        for (unsigned k = 0; k < port.width; ++k) {
            v = (v << 1) | (bits[pos++] ? 1u : 0u);
        }
        stimulus.values.push_back(v);
    }
    return stimulus;
}

}  // namespace stimnet
