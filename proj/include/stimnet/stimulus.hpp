#pragma once

#include <cstdint>
#include <vector>

#include "stimnet/dut.hpp"

namespace stimnet {

// splitmix64: tiny, bit-exact across platforms, published test vectors.
// One instance is owned per run so logs replay from the seed alone.
class Prng {
public:
    explicit Prng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double unit_real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

struct WeightedValue {
    std::uint64_t value = 0;
    std::uint64_t weight = 1;
    bool operator==(const WeightedValue&) const = default;
};

// Per-port randomization constraint: the whole port range, an inclusive
// [lo, hi] range, or an explicit weighted value list.
class Constraint {
public:
    enum class Kind { FullRange, Range, Weighted };

    Constraint() = default;  // full range

    static Constraint full_range();
    static Constraint range(std::uint64_t lo, std::uint64_t hi);
    static Constraint weighted(std::vector<WeightedValue> values);

    Kind kind() const { return kind_; }
    std::uint64_t lo() const { return lo_; }
    std::uint64_t hi() const { return hi_; }
    const std::vector<WeightedValue>& values() const { return values_; }

    void validate(const PortSpec& port) const;  // throws std::invalid_argument
    bool allows(std::uint64_t v, const PortSpec& port) const;

    // One PRNG draw. Ranges reduce by modulo; the bias is negligible at the
    // port widths this tool targets.
    std::uint64_t draw(Prng& prng, const PortSpec& port) const;

    bool operator==(const Constraint&) const = default;

private:
    Kind kind_ = Kind::FullRange;
    std::uint64_t lo_ = 0;
    std::uint64_t hi_ = 0;
    std::vector<WeightedValue> values_;
};

// Constraints aligned with DutSpec::inputs. Empty means full-range on
// every port.
struct ConstraintSet {
    std::vector<Constraint> per_port;

    void validate(const DutSpec& spec) const;
    const Constraint& for_port(std::size_t index) const;

    bool operator==(const ConstraintSet&) const = default;
};

// Draw each input port independently in declaration order, one PRNG call
// per port.
StimulusVector random_stimulus(const DutSpec& spec, const ConstraintSet& constraints, Prng& prng);

enum class Phase { Train, Test };
enum class StimulusSource { Random, Model };

// The stimulus-source multiplexer: training always runs random stimulus;
// the test phase runs model stimulus when one is available and not in
// fallback.
StimulusSource mux_select(Phase phase, bool model_ready, bool fallback);

}  // namespace stimnet
