#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stimnet/coverage.hpp"
#include "stimnet/dut.hpp"
#include "stimnet/network.hpp"
#include "stimnet/stimulus.hpp"

namespace stimnet {

enum class BinOrder { LowestFirst, Random };

struct EngineConfig {
    // Random transactions harvested before training. Defaults to
    // 6 * total_bins when unset: large enough that the expected residual
    // holes are a fraction of a percent of the bin space, so the test
    // phase measures prediction replay plus a short mop-up.
    std::optional<std::size_t> train_transactions;
    std::size_t iteration_cap = 5000;
    std::size_t retrain_interval = 64;
    std::size_t per_bin_model_attempts = 3;
    std::size_t retrain_epochs = 5;
    double goal = 1.0;
    std::uint64_t base_seed = 1;
    BinOrder bin_order = BinOrder::LowestFirst;
    ConstraintSet constraints;
    // Overrides the engine's network choice; layer sizes must then match
    // the model/dut dimensions. init_seed is always taken from base_seed.
    std::optional<NetworkConfig> network;

    std::size_t resolve_train_transactions(std::size_t total_bins) const;
    void validate() const;
};

// Everything captured per transaction: stimulus in, response out,
// pass/fail against the golden model, coverage movement.
struct RunRecord {
    std::size_t iteration = 0;
    Phase phase = Phase::Train;
    StimulusSource source = StimulusSource::Random;
    StimulusVector stimulus;
    ResponseVector response;
    TestStatus status = TestStatus::Pass;
    std::vector<std::size_t> newly_hit;
    double coverage = 0.0;

    bool operator==(const RunRecord&) const = default;
};

struct ClosureResult {
    bool converged = false;
    std::size_t test_iterations = 0;
    std::size_t total_iterations = 0;
    double final_coverage = 0.0;
    std::vector<RunRecord> records;
};

struct TrainingHarvest {
    TrainingSet set;
    CoverageDatabase db;
    std::vector<RunRecord> records;
};

// Phase 1 of the closed loop: drive random stimulus, warm the coverage
// database, and label every occupied bin with the input bits that
// produced it.
TrainingHarvest collect_training_data(const Dut& dut, const CoverageModel& model,
                                      const EngineConfig& config, Prng& prng);

// Baseline: random stimulus until coverage reaches the goal or the cap.
ClosureResult run_random_to_closure(const Dut& dut, const CoverageModel& model,
                                    const EngineConfig& config);

// Harvest, train, then close the remaining holes with model-predicted
// stimulus (per-bin attempt budget, random fallback, periodic retrain).
ClosureResult run_ml_to_closure(const Dut& dut, const CoverageModel& model,
                                const EngineConfig& config);

// The test-phase loop on an existing database/network/training set.
// Returns the number of test transactions applied. Exposed so oracle
// tests can drive it with a perfectly trained network.
std::size_t close_holes_with_model(const Dut& dut, CoverageDatabase& db, Network& net,
                                   TrainingSet& set, const EngineConfig& config, Prng& prng,
                                   std::vector<RunRecord>& records, std::size_t first_iteration);

struct BugHuntResult {
    std::size_t failures_found = 0;
    std::vector<StimulusVector> failing_stimuli;
    std::vector<RunRecord> records;
};

// Failure-directed mode: train a pass/fail classifier on random traffic,
// then repeatedly apply the highest-scored stimulus from a random
// candidate pool, feeding outcomes back into the classifier.
BugHuntResult run_failure_directed(const Dut& dut, const EngineConfig& config,
                                   std::size_t test_iterations, std::size_t candidate_pool = 256);

// Same transaction budget, no model: the comparison baseline.
std::size_t count_random_failures(const Dut& dut, std::size_t iterations, std::uint64_t seed);

// First index of the maximum score (ties -> lowest index).
std::size_t argmax_index(std::span<const double> scores);

// ---------------------------------------------------------------- reports

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool converged = false;
    std::optional<std::size_t> iterations;  // test iterations; empty when not converged
    std::size_t total_iterations = 0;
    double final_coverage = 0.0;

    bool operator==(const SeedOutcome&) const = default;
};

struct MethodStats {
    std::vector<SeedOutcome> seeds;
    // Lower median over all seeds with non-converged treated as infinite;
    // empty when the median seed did not converge.
    std::optional<std::size_t> median_iterations;
    std::optional<std::size_t> min_iterations;  // over converged seeds
    std::optional<std::size_t> max_iterations;
    std::size_t converged_count = 0;

    bool operator==(const MethodStats&) const = default;
};

struct WidthResult {
    unsigned width = 0;
    MethodStats random;
    MethodStats ann;

    bool operator==(const WidthResult&) const = default;
};

struct ExperimentReport {
    std::string dut;
    std::size_t seeds_per_width = 0;
    // engine config echo
    std::size_t iteration_cap = 5000;
    std::uint64_t base_seed = 0;
    double goal = 1.0;
    std::optional<std::size_t> train_transactions;  // empty = auto (6 x bins)
    std::size_t retrain_interval = 64;
    std::size_t per_bin_model_attempts = 3;
    std::size_t retrain_epochs = 5;
    BinOrder bin_order = BinOrder::LowestFirst;

    std::vector<WidthResult> widths;
    std::string tool_version;
    std::string timestamp;  // the one non-deterministic field

    bool operator==(const ExperimentReport&) const = default;
};

MethodStats summarize_outcomes(std::vector<SeedOutcome> seeds);

// Run both methods per width per seed (derived seed = base_seed +
// width*1000 + seed_index) and aggregate. Cap overruns are recorded as
// not-converged results, never as errors.
ExperimentReport compare_experiment(const std::string& dut_name,
                                    const std::vector<unsigned>& widths,
                                    std::size_t seeds_per_width, const EngineConfig& config);

}  // namespace stimnet
