#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace stimnet {

enum class Direction { In, Out };

// One named port of a device. Widths run 1..64 bits.
struct PortSpec {
    std::string name;
    unsigned width = 1;
    Direction direction = Direction::In;

    // Largest value representable on this port.
    std::uint64_t max_value() const;
};

// A device interface: ordered input and output ports. The port order is
// canonical — it fixes the bit-concatenation order used by stimulus logs,
// training targets and predicted stimuli everywhere else.
struct DutSpec {
    std::string name;
    std::vector<PortSpec> inputs;
    std::vector<PortSpec> outputs;

    void validate() const;  // throws std::invalid_argument
};

// One value per input port, in port order.
struct StimulusVector {
    std::vector<std::uint64_t> values;
    bool operator==(const StimulusVector&) const = default;
};

// One value per output port, in port order.
struct ResponseVector {
    std::vector<std::uint64_t> values;
    bool operator==(const ResponseVector&) const = default;
};

enum class TestStatus { Pass, Fail };

// Comparator result encoding on its 2-bit output port.
inline constexpr std::uint64_t kCompareLt = 0;
inline constexpr std::uint64_t kCompareEq = 1;
inline constexpr std::uint64_t kCompareGt = 2;

// ALU opcodes.
inline constexpr unsigned kAluAdd = 0;
inline constexpr unsigned kAluSub = 1;
inline constexpr unsigned kAluAnd = 2;
inline constexpr unsigned kAluOr = 3;

ResponseVector comparator_eval(std::uint64_t a, std::uint64_t b, unsigned width);

std::uint64_t golden_alu_eval(unsigned op, std::uint64_t a, std::uint64_t b, unsigned width);

// Identical to golden_alu_eval except op=SUB with a==b returns 1 instead of 0.
std::uint64_t buggy_alu_eval(unsigned op, std::uint64_t a, std::uint64_t b, unsigned width);

// PASS iff every output value matches the golden response.
TestStatus check(const ResponseVector& dut_response, const ResponseVector& golden_response);

// Transaction-level device model: a combinational eval() plus a trusted
// reference golden(). For bug-free devices the two coincide.
class Dut {
public:
    explicit Dut(DutSpec spec);
    virtual ~Dut() = default;

    const DutSpec& spec() const { return spec_; }

    virtual ResponseVector eval(const StimulusVector& stimulus) const = 0;
    virtual ResponseVector golden(const StimulusVector& stimulus) const = 0;

protected:
    // Throws if the stimulus does not conform to the spec.
    void check_stimulus(const StimulusVector& stimulus) const;

private:
    DutSpec spec_;
};

// Parametric-width comparator: inputs a, b of `width` bits, one 2-bit
// output `result` in {LT, EQ, GT}. eval() and golden() coincide.
class ComparatorDut final : public Dut {
public:
    explicit ComparatorDut(unsigned width);
    ResponseVector eval(const StimulusVector& stimulus) const override;
    ResponseVector golden(const StimulusVector& stimulus) const override;
};

// Four-op ALU: inputs op(2), a(width), b(width); output result(width).
// With inject_bug the device mis-computes SUB of equal operands.
class AluDut final : public Dut {
public:
    AluDut(unsigned width, bool inject_bug);
    ResponseVector eval(const StimulusVector& stimulus) const override;
    ResponseVector golden(const StimulusVector& stimulus) const override;

private:
    bool inject_bug_;
};

// Factory keyed by the CLI dut names. "alu" builds the buggy variant.
std::unique_ptr<Dut> make_dut(const std::string& name, unsigned width);

// Total input bit count D = sum of input port widths.
unsigned input_bit_count(const DutSpec& spec);

// Flatten a stimulus into D bits as 0.0/1.0 reals, ports in canonical
// order, MSB first within each port.
std::vector<double> stimulus_bits(const DutSpec& spec, const StimulusVector& stimulus);

// Inverse of stimulus_bits for already-thresholded bits.
StimulusVector stimulus_from_bits(const DutSpec& spec, const std::vector<bool>& bits);

}  // namespace stimnet
