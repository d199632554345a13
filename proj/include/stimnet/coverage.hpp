#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stimnet/dut.hpp"

namespace stimnet {

// A value bin: an inclusive [lo, hi] range, or an explicit value list
// when `values` is non-empty.
struct ValueBin {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    std::vector<std::uint64_t> values;

    bool contains(std::uint64_t v) const;
    bool operator==(const ValueBin&) const = default;
};

enum class PortSide { Input, Output };

// A sampled variable with its bins. Untracked coverpoints still define
// cross members but contribute no bins of their own to the flattened
// hit list (cross-only models).
struct Coverpoint {
    std::string name;
    PortSide side = PortSide::Input;
    std::size_t port = 0;
    std::vector<ValueBin> bins;
    bool tracked = true;

    bool operator==(const Coverpoint&) const = default;
};

// Cartesian product of >= 2 coverpoints, referenced by index into the
// model's coverpoint list. Cross bin index is the mixed-radix composition
// of member bin indices, first member most significant.
struct CrossSpec {
    std::string name;
    std::vector<std::size_t> points;

    bool operator==(const CrossSpec&) const = default;
};

struct CoverageModel {
    std::vector<Coverpoint> coverpoints;
    std::vector<CrossSpec> crosses;

    // Throws std::invalid_argument on structural problems: no bins, bins
    // overlapping, bins missing producible values, bad port/cross refs.
    void validate(const DutSpec& spec) const;

    // Flattened bin count: tracked coverpoint bins in declaration order,
    // then cross bins.
    std::size_t total_bins() const;

    bool operator==(const CoverageModel&) const = default;
};

// Hit counters over a model's flattened bin list. Owned by exactly one
// run; never shared.
class CoverageDatabase {
public:
    CoverageDatabase(CoverageModel model, const DutSpec& spec);

    // Increment exactly one bin per tracked coverpoint and per cross.
    // Returns the ids whose counter went 0 -> 1, ascending. Throws
    // std::runtime_error when a sampled value matches no bin.
    std::vector<std::size_t> sample(const StimulusVector& stimulus,
                                    const ResponseVector& response);

    // The bin ids a transaction lands in, without touching counters.
    std::vector<std::size_t> occupied(const StimulusVector& stimulus,
                                      const ResponseVector& response) const;

    double coverage_fraction() const;
    std::vector<std::size_t> uncovered() const;  // ascending bin ids with count 0
    std::vector<double> encode_target(std::size_t bin_id) const;  // one-hot of length B

    std::size_t total_bins() const { return hits_.size(); }
    std::size_t covered_bins() const { return covered_; }
    const std::vector<std::uint64_t>& hits() const { return hits_; }
    const CoverageModel& model() const { return model_; }

private:
    std::size_t bin_index_of(const Coverpoint& cp, const StimulusVector& stimulus,
                             const ResponseVector& response) const;

    CoverageModel model_;
    DutSpec spec_;
    std::vector<std::size_t> cp_offsets_;     // flattened offset per tracked coverpoint
    std::vector<std::size_t> cross_offsets_;  // flattened offset per cross
    std::vector<std::uint64_t> hits_;
    std::size_t covered_ = 0;
};

// Built-in models. Comparator: per-value coverpoints on a and b plus the
// full cross(a, b). ALU: coverpoints op, a, b plus cross(op, a).
CoverageModel default_model(const DutSpec& spec);

// JSON model description used in experiment configs. Coverpoints name a
// source port; omitted bins mean one bin per value.
CoverageModel model_from_json(const nlohmann::json& j, const DutSpec& spec);
nlohmann::json model_to_json(const CoverageModel& model, const DutSpec& spec);

}  // namespace stimnet
