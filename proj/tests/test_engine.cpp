#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "stimnet/engine.hpp"

using namespace stimnet;

namespace {

CoverageModel cross_only(const DutSpec& spec) {
    CoverageModel model = default_model(spec);
    for (auto& cp : model.coverpoints) cp.tracked = false;
    return model;
}

std::size_t median_of(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

}  // namespace

TEST_CASE("collect_training_data labels one pair per occupied bin") {
    const ComparatorDut dut(2);
    EngineConfig config;
    config.train_transactions = 10;
    config.base_seed = 3;
    Prng prng(config.base_seed);

    SUBCASE("cross-only model: one pair per transaction") {
        TrainingHarvest h = collect_training_data(dut, cross_only(dut.spec()), config, prng);
        REQUIRE(h.set.size() == 10);
        for (const auto& pair : h.set) {
            CHECK(pair.feature.size() == 16);
            CHECK(pair.target.size() == 4);
        }
        CHECK(h.records.size() == 10);
    }
    SUBCASE("default model: three pairs per transaction") {
        TrainingHarvest h = collect_training_data(dut, default_model(dut.spec()), config, prng);
        CHECK(h.set.size() == 30);
    }
}

TEST_CASE("duplicate draws produce duplicate pairs") {
    const ComparatorDut dut(1);
    EngineConfig config;
    config.train_transactions = 64;  // far more than 4 distinct stimuli
    Prng prng(5);
    TrainingHarvest h = collect_training_data(dut, cross_only(dut.spec()), config, prng);
    CHECK(h.set.size() == 64);  // kept, not deduplicated
}

TEST_CASE("2000 random transactions label every W=2 cross bin") {
    const ComparatorDut dut(2);
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        EngineConfig config;
        config.train_transactions = 2000;
        Prng prng(seed);
        TrainingHarvest h = collect_training_data(dut, cross_only(dut.spec()), config, prng);
        std::set<std::size_t> labelled;
        for (const auto& pair : h.set) {
            labelled.insert(static_cast<std::size_t>(
                std::max_element(pair.feature.begin(), pair.feature.end()) -
                pair.feature.begin()));
        }
        CHECK(labelled.size() == 16);
    }
}

TEST_CASE("random closure medians sit in the analytic bands") {
    const ComparatorDut dut2(2);
    std::vector<std::size_t> w2;
    for (std::uint64_t s = 0; s < 50; ++s) {
        EngineConfig config;
        config.base_seed = 100 + s;
        const ClosureResult r = run_random_to_closure(dut2, default_model(dut2.spec()), config);
        REQUIRE(r.converged);
        CHECK(r.test_iterations == r.total_iterations);
        w2.push_back(r.test_iterations);
    }
    const std::size_t med2 = median_of(w2);
    CHECK(med2 >= 38);
    CHECK(med2 <= 70);

    const ComparatorDut dut3(3);
    std::vector<std::size_t> w3;
    for (std::uint64_t s = 0; s < 50; ++s) {
        EngineConfig config;
        config.base_seed = 200 + s;
        w3.push_back(
            run_random_to_closure(dut3, default_model(dut3.spec()), config).test_iterations);
    }
    const std::size_t med3 = median_of(w3);
    CHECK(med3 >= 210);
    CHECK(med3 <= 400);
}

TEST_CASE("random closure respects the cap and flags non-convergence") {
    const ComparatorDut dut(5);
    EngineConfig config;
    config.iteration_cap = 100;
    const ClosureResult r = run_random_to_closure(dut, default_model(dut.spec()), config);
    CHECK_FALSE(r.converged);
    CHECK(r.test_iterations == 100);
    CHECK(r.final_coverage < 1.0);
}

TEST_CASE("pre-warmed goal short-circuits to zero iterations") {
    const ComparatorDut dut(2);
    EngineConfig config;
    config.goal = 0.01;  // a single sample covers >= 3/24 bins
    ClosureResult first = run_random_to_closure(dut, default_model(dut.spec()), config);
    CHECK(first.converged);
    CHECK(first.test_iterations == 1);
}

TEST_CASE("record streams are replayable and coverage is monotone") {
    const ComparatorDut dut(2);
    EngineConfig config;
    config.base_seed = 99;
    const ClosureResult a = run_random_to_closure(dut, default_model(dut.spec()), config);
    const ClosureResult b = run_random_to_closure(dut, default_model(dut.spec()), config);
    CHECK(a.records == b.records);
    double coverage = 0.0;
    std::size_t iteration = 0;
    for (const auto& r : a.records) {
        CHECK(r.coverage >= coverage);
        coverage = r.coverage;
        if (&r != &a.records.front()) CHECK(r.iteration == iteration + 1);
        iteration = r.iteration;
    }
}

TEST_CASE("ml closure converges quickly at small widths") {
    const ComparatorDut dut(2);
    std::vector<std::size_t> iters;
    for (std::uint64_t s = 0; s < 10; ++s) {
        EngineConfig config;
        config.base_seed = 300 + s;
        const ClosureResult r = run_ml_to_closure(dut, default_model(dut.spec()), config);
        REQUIRE(r.converged);
        CHECK(r.total_iterations == r.test_iterations + 6 * 24);
        iters.push_back(r.test_iterations);
    }
    CHECK(median_of(iters) <= 24);
}

TEST_CASE("ml closure replays byte-identically from its seed") {
    const ComparatorDut dut(2);
    EngineConfig config;
    config.base_seed = 17;
    config.train_transactions = 20;  // leave holes so the model phase runs
    const ClosureResult a = run_ml_to_closure(dut, default_model(dut.spec()), config);
    const ClosureResult b = run_ml_to_closure(dut, default_model(dut.spec()), config);
    CHECK(a.records == b.records);
    CHECK(a.test_iterations == b.test_iterations);
    bool saw_model_source = false;
    for (const auto& r : a.records) {
        if (r.source == StimulusSource::Model) saw_model_source = true;
    }
    CHECK(saw_model_source);
}

TEST_CASE("converged claims match an independent recount of the record stream") {
    const ComparatorDut dut(2);
    const CoverageModel model = default_model(dut.spec());
    const std::size_t total_bins = model.total_bins();
    for (std::uint64_t s = 0; s < 5; ++s) {
        EngineConfig config;
        config.base_seed = 700 + s;
        config.train_transactions = 25;  // leave work for the test phase
        const ClosureResult r = run_ml_to_closure(dut, model, config);
        std::set<std::size_t> hit;
        double coverage = 0.0;
        std::size_t last_iteration = 0;
        for (const auto& record : r.records) {
            hit.insert(record.newly_hit.begin(), record.newly_hit.end());
            CHECK(record.coverage >= coverage);
            coverage = record.coverage;
            if (&record != &r.records.front()) CHECK(record.iteration == last_iteration + 1);
            last_iteration = record.iteration;
        }
        CHECK(r.converged == (hit.size() == total_bins));
        CHECK(r.final_coverage ==
              static_cast<double>(hit.size()) / static_cast<double>(total_bins));
        CHECK(r.test_iterations <= config.iteration_cap);
    }
}

TEST_CASE("ml closure rejects an empty training phase") {
    const ComparatorDut dut(2);
    EngineConfig config;
    config.train_transactions = 0;
    CHECK_THROWS_AS(run_ml_to_closure(dut, default_model(dut.spec()), config),
                    std::invalid_argument);
}

TEST_CASE("perfectly trained model closes each hole in one shot") {
    const ComparatorDut dut(2);
    CoverageModel model = cross_only(dut.spec());
    CoverageDatabase db(model, dut.spec());

    // exhaustive training set over all 16 bins
    TrainingSet set;
    for (std::uint64_t a = 0; a < 4; ++a) {
        for (std::uint64_t b = 0; b < 4; ++b) {
            const StimulusVector s{{a, b}};
            set.push_back({db.encode_target(a * 4 + b), stimulus_bits(dut.spec(), s), 0});
        }
    }
    Network net(NetworkConfig{{16, 4}, 0.5, 300, 8});
    net.train(set);

    // warm the database with a handful of stimuli
    std::size_t warm = 0;
    for (const StimulusVector& s :
         {StimulusVector{{0, 0}}, StimulusVector{{1, 3}}, StimulusVector{{2, 2}}}) {
        db.sample(s, dut.eval(s));
        ++warm;
    }
    const std::size_t holes = db.uncovered().size();
    REQUIRE(holes == 16 - warm);

    EngineConfig config;
    config.base_seed = 1;
    Prng prng(55);
    std::vector<RunRecord> records;
    const std::size_t test_iters =
        close_holes_with_model(dut, db, net, set, config, prng, records, warm);
    CHECK(test_iters == holes);  // one prediction per hole, each lands
    CHECK(db.coverage_fraction() == 1.0);
    for (const auto& r : records) CHECK(r.source == StimulusSource::Model);
}

TEST_CASE("a goal already met means zero test iterations") {
    const ComparatorDut dut(2);
    CoverageModel model = cross_only(dut.spec());
    CoverageDatabase db(model, dut.spec());
    for (std::uint64_t a = 0; a < 4; ++a) {
        for (std::uint64_t b = 0; b < 4; ++b) {
            const StimulusVector s{{a, b}};
            db.sample(s, dut.eval(s));
        }
    }
    REQUIRE(db.coverage_fraction() == 1.0);
    Network net(NetworkConfig{{16, 4}, 0.5, 1, 1});
    TrainingSet set;
    EngineConfig config;
    Prng prng(1);
    std::vector<RunRecord> records;
    CHECK(close_holes_with_model(dut, db, net, set, config, prng, records, 16) == 0);
    CHECK(records.empty());
}

TEST_CASE("a custom network override drives the ml loop") {
    const ComparatorDut dut(2);
    const CoverageModel model = default_model(dut.spec());
    EngineConfig config;
    config.base_seed = 41;
    config.train_transactions = 30;
    config.network = NetworkConfig{{24, 10, 4}, 0.5, 40, 0};  // hidden layer
    const ClosureResult r = run_ml_to_closure(dut, model, config);
    CHECK(r.converged);

    config.network = NetworkConfig{{16, 4}, 0.5, 40, 0};  // wrong input size
    CHECK_THROWS_AS(run_ml_to_closure(dut, model, config), std::invalid_argument);
}

TEST_CASE("random bin order also closes and stays deterministic") {
    const ComparatorDut dut(2);
    EngineConfig config;
    config.base_seed = 23;
    config.train_transactions = 30;
    config.bin_order = BinOrder::Random;
    const ClosureResult a = run_ml_to_closure(dut, default_model(dut.spec()), config);
    const ClosureResult b = run_ml_to_closure(dut, default_model(dut.spec()), config);
    CHECK(a.converged);
    CHECK(a.records == b.records);
}

TEST_CASE("fallback keeps the loop live when the model misses") {
    // A hostile setup: tiny training phase, so most bins are unseen and
    // the model cannot know them. Random fallback must still close.
    for (unsigned w = 1; w <= 3; ++w) {
        const ComparatorDut dut(w);
        const CoverageModel model = default_model(dut.spec());
        for (std::uint64_t s = 0; s < 20; ++s) {
            EngineConfig config;
            config.base_seed = 900 + w * 50 + s;
            config.train_transactions = 8;
            config.iteration_cap = 50 * model.total_bins();
            const ClosureResult r = run_ml_to_closure(dut, model, config);
            CHECK(r.converged);
        }
    }
}

TEST_CASE("argmax returns the first maximal index") {
    CHECK(argmax_index(std::vector<double>{0.1, 0.9, 0.9}) == 1);
    CHECK(argmax_index(std::vector<double>{2.0}) == 0);
    CHECK_THROWS_AS(argmax_index(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("argmax is invariant under strictly increasing transforms") {
    Prng prng(4444);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores;
        for (int i = 0; i < 20; ++i) scores.push_back(prng.unit_real());
        std::vector<double> affine, logistic;
        for (double s : scores) {
            affine.push_back(3.0 * s + 1.0);
            logistic.push_back(1.0 / (1.0 + std::exp(-5.0 * s)));
        }
        const std::size_t base = argmax_index(scores);
        CHECK(argmax_index(affine) == base);
        CHECK(argmax_index(logistic) == base);
    }
}

TEST_CASE("failure-directed search beats the random baseline") {
    const auto dut = make_dut("alu", 4);
    std::vector<double> ratios;
    for (std::uint64_t s = 0; s < 3; ++s) {
        EngineConfig config;
        config.base_seed = 500 + s;
        const BugHuntResult hunt = run_failure_directed(*dut, config, 500);
        const std::size_t baseline = count_random_failures(*dut, 500, 500 + s);
        CHECK(hunt.failures_found >= 3 * std::max<std::size_t>(baseline, 1));
        // every reported failure replays as a failure
        for (const auto& s_fail : hunt.failing_stimuli) {
            CHECK(check(dut->eval(s_fail), dut->golden(s_fail)) == TestStatus::Fail);
            CHECK(s_fail.values[0] == kAluSub);
            CHECK(s_fail.values[1] == s_fail.values[2]);
        }
        CHECK(hunt.failing_stimuli.size() == hunt.failures_found);
    }
}

TEST_CASE("bug-free device yields zero failures") {
    const AluDut clean(4, /*inject_bug=*/false);
    EngineConfig config;
    config.base_seed = 7;
    const BugHuntResult hunt = run_failure_directed(clean, config, 100);
    CHECK(hunt.failures_found == 0);
    CHECK(hunt.failing_stimuli.empty());
}

TEST_CASE("compare experiment: trend and report shape") {
    EngineConfig config;
    config.base_seed = 1;
    const ExperimentReport report = compare_experiment("comparator", {1, 2, 3}, 10, config);
    REQUIRE(report.widths.size() == 3);
    CHECK(report.seeds_per_width == 10);
    for (const auto& row : report.widths) {
        CHECK(row.random.seeds.size() == 10);
        CHECK(row.ann.seeds.size() == 10);
    }
    // width 1: both methods converge quickly (checked loosely)
    REQUIRE(report.widths[0].random.median_iterations.has_value());
    REQUIRE(report.widths[0].ann.median_iterations.has_value());
    CHECK(*report.widths[0].random.median_iterations <= 16);
    CHECK(*report.widths[0].ann.median_iterations <= 16);
    // widths >= 2: ann median no worse than random median
    for (std::size_t i = 1; i < report.widths.size(); ++i) {
        REQUIRE(report.widths[i].random.median_iterations.has_value());
        REQUIRE(report.widths[i].ann.median_iterations.has_value());
        CHECK(*report.widths[i].ann.median_iterations <=
              *report.widths[i].random.median_iterations);
    }
}

TEST_CASE("compare derives per-run seeds as base + width*1000 + index") {
    EngineConfig config;
    config.base_seed = 40;
    const ExperimentReport report = compare_experiment("comparator", {2}, 3, config);
    const auto& seeds = report.widths[0].random.seeds;
    REQUIRE(seeds.size() == 3);
    CHECK(seeds[0].seed == 40 + 2000 + 0);
    CHECK(seeds[1].seed == 40 + 2000 + 1);
    CHECK(seeds[2].seed == 40 + 2000 + 2);

    // each cell is reproducible standalone from its derived seed
    const ComparatorDut dut(2);
    EngineConfig solo = config;
    solo.base_seed = seeds[1].seed;
    CHECK(run_random_to_closure(dut, default_model(dut.spec()), solo).test_iterations ==
          *seeds[1].iterations);
}

TEST_CASE("summarize_outcomes medians match an independent recount") {
    std::vector<SeedOutcome> outcomes;
    for (std::size_t i = 0; i < 7; ++i) {
        SeedOutcome o;
        o.seed = i;
        o.converged = i != 3;  // one non-converged seed
        if (o.converged) o.iterations = 10 * (7 - i);
        o.total_iterations = o.iterations.value_or(5000);
        outcomes.push_back(o);
    }
    const MethodStats stats = summarize_outcomes(outcomes);
    CHECK(stats.converged_count == 6);
    CHECK(stats.min_iterations == 10);
    CHECK(stats.max_iterations == 70);
    // independent recount: sorted converged values with infinities last
    std::vector<std::size_t> values;
    for (const auto& o : outcomes) {
        if (o.converged) values.push_back(*o.iterations);
    }
    std::sort(values.begin(), values.end());
    CHECK(stats.median_iterations == values[(outcomes.size() - 1) / 2]);

    // a mostly-unconverged cell has no median
    std::vector<SeedOutcome> bad(5);
    bad[0].converged = true;
    bad[0].iterations = 3;
    const MethodStats bad_stats = summarize_outcomes(bad);
    CHECK_FALSE(bad_stats.median_iterations.has_value());
    CHECK(bad_stats.converged_count == 1);
}

TEST_CASE("engine config validation") {
    EngineConfig config;
    config.goal = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.goal = 1.5;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = EngineConfig{};
    config.retrain_interval = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = EngineConfig{};
    CHECK(config.resolve_train_transactions(24) == 144);
    config.train_transactions = 10;
    CHECK(config.resolve_train_transactions(24) == 10);
}
