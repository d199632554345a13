#include "stimnet/stimulus.hpp"

#include <stdexcept>

namespace stimnet {

Constraint Constraint::full_range() {
    return Constraint{};
}

Constraint Constraint::range(std::uint64_t lo, std::uint64_t hi) {
    Constraint c;
    c.kind_ = Kind::Range;
    c.lo_ = lo;
    c.hi_ = hi;
    return c;
}

Constraint Constraint::weighted(std::vector<WeightedValue> values) {
    Constraint c;
    c.kind_ = Kind::Weighted;
    c.values_ = std::move(values);
    return c;
}

void Constraint::validate(const PortSpec& port) const {
    switch (kind_) {
        case Kind::FullRange:
            return;
        case Kind::Range:
            if (lo_ > hi_) {
                throw std::invalid_argument("constraint on " + port.name + ": lo > hi");
            }
            if (hi_ > port.max_value()) {
                throw std::invalid_argument("constraint on " + port.name +
                                            ": hi exceeds port width");
            }
            return;
        case Kind::Weighted: {
            if (values_.empty()) {
                throw std::invalid_argument("constraint on " + port.name + ": empty value list");
            }
            std::uint64_t total = 0;
            for (const auto& wv : values_) {
                if (wv.weight == 0) {
                    throw std::invalid_argument("constraint on " + port.name + ": zero weight");
                }
                if (wv.value > port.max_value()) {
                    throw std::invalid_argument("constraint on " + port.name +
                                                ": value exceeds port width");
                }
                total += wv.weight;
            }
            if (total == 0) {
                throw std::invalid_argument("constraint on " + port.name + ": weights sum to 0");
            }
            return;
        }
    }
}

bool Constraint::allows(std::uint64_t v, const PortSpec& port) const {
    switch (kind_) {
        case Kind::FullRange:
            return v <= port.max_value();
        case Kind::Range:
            return v >= lo_ && v <= hi_;
        case Kind::Weighted:
            for (const auto& wv : values_) {
                if (wv.value == v) return true;
            }
            return false;
    }
    return false;
}

std::uint64_t Constraint::draw(Prng& prng, const PortSpec& port) const {
    const std::uint64_t u = prng.next();
    switch (kind_) {
        case Kind::FullRange: {
            const std::uint64_t span = port.max_value() == ~std::uint64_t{0}
                                           ? 0  // full 64-bit port: u itself
                                           : port.max_value() + 1;
            return span == 0 ? u : u % span;
        }
        case Kind::Range: {
            const std::uint64_t span = hi_ - lo_ + 1;  // wraps to 0 on the full 64-bit range
            return span == 0 ? u : lo_ + u % span;
        }
        case Kind::Weighted: {
            std::uint64_t total = 0;
            for (const auto& wv : values_) total += wv.weight;
            std::uint64_t pick = u % total;
            for (const auto& wv : values_) {
                if (pick < wv.weight) return wv.value;
                pick -= wv.weight;
            }
            return values_.back().value;  // unreachable
        }
    }
    return 0;
}

void ConstraintSet::validate(const DutSpec& spec) const {
    if (!per_port.empty() && per_port.size() != spec.inputs.size()) {
        throw std::invalid_argument("constraint count does not match input port count");
    }
    for (std::size_t i = 0; i < per_port.size(); ++i) {
        per_port[i].validate(spec.inputs[i]);
    }
}

const Constraint& ConstraintSet::for_port(std::size_t index) const {
    static const Constraint kFullRange{};
    return index < per_port.size() ? per_port[index] : kFullRange;
}

StimulusVector random_stimulus(const DutSpec& spec, const ConstraintSet& constraints, Prng& prng) {
    StimulusVector stimulus;
    stimulus.values.reserve(spec.inputs.size());
    for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
        stimulus.values.push_back(constraints.for_port(i).draw(prng, spec.inputs[i]));
    }
    return stimulus;
}

StimulusSource mux_select(Phase phase, bool model_ready, bool fallback) {
    if (phase == Phase::Test && model_ready && !fallback) {
        return StimulusSource::Model;
    }
    return StimulusSource::Random;
}

}  // namespace stimnet
