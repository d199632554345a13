#include <doctest.h>

#include <algorithm>
#include <set>

#include "stimnet/coverage.hpp"
#include "stimnet/stimulus.hpp"

using namespace stimnet;

namespace {

// The cross(a, b) alone: 16 flattened bins at W=2, the shape used by the
// target-encoding examples.
CoverageModel cross_only_model(const DutSpec& spec) {
    CoverageModel model = default_model(spec);
    for (auto& cp : model.coverpoints) cp.tracked = false;
    return model;
}

}  // namespace

TEST_CASE("cross bin indexing is mixed-radix, first point most significant") {
    const ComparatorDut dut(2);
    CoverageDatabase db(cross_only_model(dut.spec()), dut.spec());
    REQUIRE(db.total_bins() == 16);

    const StimulusVector s{{2, 1}};
    const auto newly = db.sample(s, dut.eval(s));
    CHECK(newly == std::vector<std::size_t>{2 * 4 + 1});

    // second sample of the same stimulus hits nothing new
    CHECK(db.sample(s, dut.eval(s)).empty());
    CHECK(db.hits()[9] == 2);
}

TEST_CASE("exhaustive W=2 sweep hits every cross bin exactly once") {
    const ComparatorDut dut(2);
    CoverageDatabase db(cross_only_model(dut.spec()), dut.spec());
    for (std::uint64_t a = 0; a < 4; ++a) {
        for (std::uint64_t b = 0; b < 4; ++b) {
            const StimulusVector s{{a, b}};
            const auto newly = db.sample(s, dut.eval(s));
            CHECK(newly.size() == 1);
        }
    }
    CHECK(db.coverage_fraction() == 1.0);
    for (std::uint64_t count : db.hits()) CHECK(count == 1);
}

TEST_CASE("coverage fraction counts hit bins") {
    const ComparatorDut dut(2);
    CoverageDatabase db(cross_only_model(dut.spec()), dut.spec());
    CHECK(db.coverage_fraction() == 0.0);
    const StimulusVector s{{1, 3}};
    db.sample(s, dut.eval(s));
    CHECK(db.coverage_fraction() == doctest::Approx(0.0625));
}

TEST_CASE("uncovered lists holes in ascending order") {
    const ComparatorDut dut(2);
    CoverageDatabase db(cross_only_model(dut.spec()), dut.spec());
    std::vector<std::size_t> all(16);
    for (std::size_t i = 0; i < 16; ++i) all[i] = i;
    CHECK(db.uncovered() == all);

    const StimulusVector s{{2, 1}};
    db.sample(s, dut.eval(s));
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < 16; ++i) {
        if (i != 9) expect.push_back(i);
    }
    CHECK(db.uncovered() == expect);
}

TEST_CASE("encode_target builds a one-hot over the flattened bins") {
    const ComparatorDut dut(2);
    CoverageDatabase db(cross_only_model(dut.spec()), dut.spec());
    const auto one_hot = db.encode_target(9);
    REQUIRE(one_hot.size() == 16);
    for (std::size_t i = 0; i < one_hot.size(); ++i) {
        CHECK(one_hot[i] == (i == 9 ? 1.0 : 0.0));
    }
    CHECK_THROWS_AS(db.encode_target(16), std::invalid_argument);
    // one-hot round-trip: argmax recovers the bin id
    for (std::size_t bin = 0; bin < 16; ++bin) {
        const auto v = db.encode_target(bin);
        CHECK(static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin()) == bin);
    }
}

TEST_CASE("default comparator model sizes") {
    CHECK(default_model(ComparatorDut(1).spec()).total_bins() == 2 + 2 + 4);
    CHECK(default_model(ComparatorDut(2).spec()).total_bins() == 4 + 4 + 16);
    CHECK(default_model(ComparatorDut(3).spec()).total_bins() == 8 + 8 + 64);
    // cross bin counts alone
    CoverageModel cross2 = default_model(ComparatorDut(2).spec());
    for (auto& cp : cross2.coverpoints) cp.tracked = false;
    CHECK(cross2.total_bins() == 16);
    CoverageModel cross1 = default_model(ComparatorDut(1).spec());
    for (auto& cp : cross1.coverpoints) cp.tracked = false;
    CHECK(cross1.total_bins() == 4);
}

TEST_CASE("default alu model shape") {
    const AluDut alu(4, true);
    const CoverageModel model = default_model(alu.spec());
    REQUIRE(model.coverpoints.size() == 3);
    REQUIRE(model.crosses.size() == 1);
    CHECK(model.total_bins() == 4 + 16 + 16 + 4 * 16);
    CHECK_THROWS_AS(default_model(DutSpec{"fifo",
                                          {{"x", 1, Direction::In}},
                                          {{"y", 1, Direction::Out}}}),
                    std::invalid_argument);
}

TEST_CASE("every sample occupies one bin per tracked coverpoint and cross") {
    const ComparatorDut dut(3);
    CoverageDatabase db(default_model(dut.spec()), dut.spec());
    Prng prng(31);
    for (int i = 0; i < 200; ++i) {
        const StimulusVector s = random_stimulus(dut.spec(), {}, prng);
        CHECK(db.occupied(s, dut.eval(s)).size() == 3);  // cp a, cp b, cross
    }
}

TEST_CASE("newly-hit ids are exactly the ids leaving uncovered") {
    const ComparatorDut dut(2);
    CoverageDatabase db(default_model(dut.spec()), dut.spec());
    Prng prng(77);
    double last_fraction = 0.0;
    while (db.coverage_fraction() < 1.0) {
        const std::set<std::size_t> before_holes = [&] {
            const auto u = db.uncovered();
            return std::set<std::size_t>(u.begin(), u.end());
        }();
        const StimulusVector s = random_stimulus(dut.spec(), {}, prng);
        const auto newly = db.sample(s, dut.eval(s));
        const auto after = db.uncovered();
        const std::set<std::size_t> after_holes(after.begin(), after.end());
        for (std::size_t id : newly) {
            CHECK(before_holes.count(id) == 1);
            CHECK(after_holes.count(id) == 0);
        }
        CHECK(before_holes.size() - after_holes.size() == newly.size());
        CHECK(db.coverage_fraction() >= last_fraction);
        last_fraction = db.coverage_fraction();
    }
    CHECK(db.uncovered().empty());
}

TEST_CASE("incomplete bins are rejected at model build for narrow ports") {
    const ComparatorDut dut(2);
    CoverageModel model;
    Coverpoint cp;
    cp.name = "a";
    cp.side = PortSide::Input;
    cp.port = 0;
    cp.bins = {ValueBin{0, 1, {}}};  // misses values 2 and 3
    model.coverpoints.push_back(cp);
    CHECK_THROWS_AS(CoverageDatabase(model, dut.spec()), std::invalid_argument);
}

TEST_CASE("value matching no bin is a model-completeness error") {
    // Ports too wide for exhaustive build-time checking hit the error at
    // sample time instead.
    const DutSpec spec{"d", {{"x", 20, Direction::In}}, {{"y", 1, Direction::Out}}};
    CoverageModel model;
    Coverpoint cp;
    cp.name = "x";
    cp.bins = {ValueBin{0, 99, {}}};  // misses everything above 99
    model.coverpoints.push_back(cp);
    CoverageDatabase db(model, spec);
    CHECK(db.sample(StimulusVector{{42}}, ResponseVector{{0}}) == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(db.sample(StimulusVector{{500}}, ResponseVector{{0}}), std::runtime_error);
}

TEST_CASE("range and list bins partition wider ports") {
    const DutSpec spec{"d", {{"x", 4, Direction::In}}, {{"y", 1, Direction::Out}}};
    CoverageModel model;
    Coverpoint cp;
    cp.name = "x";
    cp.bins = {ValueBin{0, 7, {}}, ValueBin{0, 0, {8, 15}}, ValueBin{9, 14, {}}};
    model.coverpoints.push_back(cp);
    CoverageDatabase db(model, spec);
    CHECK(db.total_bins() == 3);
    CHECK(db.sample(StimulusVector{{3}}, ResponseVector{{0}}) == std::vector<std::size_t>{0});
    CHECK(db.sample(StimulusVector{{15}}, ResponseVector{{0}}) == std::vector<std::size_t>{1});
    CHECK(db.sample(StimulusVector{{9}}, ResponseVector{{0}}) == std::vector<std::size_t>{2});
}

TEST_CASE("overlapping bins are rejected") {
    const DutSpec spec{"d", {{"x", 3, Direction::In}}, {{"y", 1, Direction::Out}}};
    CoverageModel model;
    Coverpoint cp;
    cp.name = "x";
    cp.bins = {ValueBin{0, 4, {}}, ValueBin{4, 7, {}}};
    model.coverpoints.push_back(cp);
    CHECK_THROWS_AS(CoverageDatabase(model, spec), std::invalid_argument);
}

TEST_CASE("model JSON round-trip preserves bin ids") {
    const ComparatorDut dut(3);
    const CoverageModel model = default_model(dut.spec());
    const nlohmann::json j = model_to_json(model, dut.spec());
    const CoverageModel reloaded = model_from_json(j, dut.spec());
    CHECK(reloaded == model);
    CHECK(reloaded.total_bins() == model.total_bins());

    // flattened ids stable across the round trip
    CoverageDatabase db1(model, dut.spec());
    CoverageDatabase db2(reloaded, dut.spec());
    Prng prng(5);
    for (int i = 0; i < 100; ++i) {
        const StimulusVector s = random_stimulus(dut.spec(), {}, prng);
        CHECK(db1.sample(s, dut.eval(s)) == db2.sample(s, dut.eval(s)));
    }
}

TEST_CASE("model JSON rejects unknown keys and bad sources") {
    const ComparatorDut dut(2);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"coverpoint":[]})"), dut.spec()),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        model_from_json(
            nlohmann::json::parse(R"({"coverpoints":[{"name":"q","source":"nope"}]})"),
            dut.spec()),
        std::invalid_argument);
}

TEST_CASE("output-port coverpoints sample the response") {
    const ComparatorDut dut(2);
    const auto j = nlohmann::json::parse(R"({
      "coverpoints": [
        {"name": "verdict", "source": "result",
         "bins": [{"lo":0,"hi":0},{"lo":1,"hi":1},{"lo":2,"hi":3}]}
      ]})");
    CoverageDatabase db(model_from_json(j, dut.spec()), dut.spec());
    const StimulusVector lt{{0, 3}}, eq{{2, 2}}, gt{{3, 1}};
    CHECK(db.sample(lt, dut.eval(lt)) == std::vector<std::size_t>{0});
    CHECK(db.sample(eq, dut.eval(eq)) == std::vector<std::size_t>{1});
    CHECK(db.sample(gt, dut.eval(gt)) == std::vector<std::size_t>{2});
    CHECK(db.coverage_fraction() == 1.0);
}
