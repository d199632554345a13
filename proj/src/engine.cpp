#include "stimnet/engine.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <stdexcept>

#include "stimnet/version.hpp"

namespace stimnet {

std::size_t EngineConfig::resolve_train_transactions(std::size_t total_bins) const {
    if (train_transactions) return *train_transactions;
    return 6 * total_bins;
}

void EngineConfig::validate() const {
    if (train_transactions && *train_transactions == 0) {
        throw std::invalid_argument("train_transactions must be positive");
    }
    if (iteration_cap == 0 || retrain_interval == 0 || per_bin_model_attempts == 0 ||
        retrain_epochs == 0) {
        throw std::invalid_argument("engine counters must be positive");
    }
    if (!(goal > 0.0 && goal <= 1.0)) {
        throw std::invalid_argument("goal must be in (0, 1]");
    }
    if (network) network->validate();
}

namespace {

RunRecord apply_transaction(const Dut& dut, CoverageDatabase& db, const StimulusVector& stimulus,
                            std::size_t iteration, Phase phase, StimulusSource source) {
    RunRecord record;
    record.iteration = iteration;
    record.phase = phase;
    record.source = source;
    record.stimulus = stimulus;
    record.response = dut.eval(stimulus);
    record.status = check(record.response, dut.golden(stimulus));
    record.newly_hit = db.sample(stimulus, record.response);
    record.coverage = db.coverage_fraction();
    return record;
}

NetworkConfig closure_network_config(const EngineConfig& config, std::size_t bins,
                                     std::size_t bits) {
    NetworkConfig net_config;
    if (config.network) {
        net_config = *config.network;
    } else {
        // The one-hot -> bit-pattern map is a lookup table; a single
        // sigmoid layer memorizes it exactly and keeps retrains cheap.
        net_config.layer_sizes = {bins, bits};
        net_config.learning_rate = 0.5;
        net_config.epochs = 30;
    }
    net_config.init_seed = config.base_seed;
    return net_config;
}

}  // namespace

TrainingHarvest collect_training_data(const Dut& dut, const CoverageModel& model,
                                      const EngineConfig& config, Prng& prng) {
    config.validate();
    config.constraints.validate(dut.spec());
    CoverageDatabase db(model, dut.spec());
    const std::size_t transactions = config.resolve_train_transactions(db.total_bins());
    if (transactions == 0) {
        throw std::invalid_argument("training phase needs at least one transaction");
    }

    TrainingHarvest harvest{TrainingSet{}, std::move(db), {}};
    harvest.records.reserve(transactions);
    for (std::size_t t = 0; t < transactions; ++t) {
        const StimulusVector stimulus = random_stimulus(dut.spec(), config.constraints, prng);
        RunRecord record = apply_transaction(dut, harvest.db, stimulus, t, Phase::Train,
                                             mux_select(Phase::Train, false, false));
        const std::vector<double> bits = stimulus_bits(dut.spec(), stimulus);
        for (std::size_t bin : harvest.db.occupied(stimulus, record.response)) {
            harvest.set.push_back({harvest.db.encode_target(bin), bits, t});
        }
        harvest.records.push_back(std::move(record));
    }
    return harvest;
}

ClosureResult run_random_to_closure(const Dut& dut, const CoverageModel& model,
                                    const EngineConfig& config) {
    config.validate();
    config.constraints.validate(dut.spec());
    CoverageDatabase db(model, dut.spec());
    Prng prng(config.base_seed);

    ClosureResult result;
    while (db.coverage_fraction() < config.goal && result.test_iterations < config.iteration_cap) {
        const StimulusVector stimulus = random_stimulus(dut.spec(), config.constraints, prng);
        result.records.push_back(apply_transaction(dut, db, stimulus, result.test_iterations,
                                                   Phase::Test,
                                                   mux_select(Phase::Test, false, false)));
        ++result.test_iterations;
    }
    result.total_iterations = result.test_iterations;
    result.final_coverage = db.coverage_fraction();
    result.converged = result.final_coverage >= config.goal;
    return result;
}

std::size_t close_holes_with_model(const Dut& dut, CoverageDatabase& db, Network& net,
                                   TrainingSet& set, const EngineConfig& config, Prng& prng,
                                   std::vector<RunRecord>& records, std::size_t first_iteration) {
    std::vector<std::size_t> attempts_left(db.total_bins(), config.per_bin_model_attempts);
    std::size_t test_iterations = 0;

    while (db.coverage_fraction() < config.goal && test_iterations < config.iteration_cap) {
        // Target the lowest-id hole that still has model attempts; when
        // every hole has exhausted its budget, fall back to random.
        std::vector<std::size_t> candidates;
        for (std::size_t hole : db.uncovered()) {
            if (attempts_left[hole] > 0) candidates.push_back(hole);
        }
        std::optional<std::size_t> target;
        if (!candidates.empty()) {
            target = config.bin_order == BinOrder::LowestFirst
                         ? candidates.front()
                         : candidates[prng.next() % candidates.size()];
        }

        const StimulusSource source = mux_select(Phase::Test, true, !target.has_value());
        StimulusVector stimulus;
        if (source == StimulusSource::Model) {
            stimulus = predict_stimulus(net, db.encode_target(*target), dut.spec());
        } else {
            stimulus = random_stimulus(dut.spec(), config.constraints, prng);
        }

        RunRecord record = apply_transaction(dut, db, stimulus,
                                             first_iteration + test_iterations, Phase::Test,
                                             source);
        const std::vector<std::size_t> occupied = db.occupied(stimulus, record.response);
        const std::vector<double> bits = stimulus_bits(dut.spec(), stimulus);
        for (std::size_t bin : occupied) {
            set.push_back({db.encode_target(bin), bits, first_iteration + test_iterations});
        }
        if (target &&
            std::find(occupied.begin(), occupied.end(), *target) == occupied.end()) {
            --attempts_left[*target];
        }
        records.push_back(std::move(record));
        ++test_iterations;

        if (test_iterations % config.retrain_interval == 0 &&
            db.coverage_fraction() < config.goal) {
            net.train(set, config.retrain_epochs);
        }
    }
    return test_iterations;
}

ClosureResult run_ml_to_closure(const Dut& dut, const CoverageModel& model,
                                const EngineConfig& config) {
    config.validate();
    Prng prng(config.base_seed);
    TrainingHarvest harvest = collect_training_data(dut, model, config, prng);

    NetworkConfig net_config = closure_network_config(config, harvest.db.total_bins(),
                                                      input_bit_count(dut.spec()));
    Network net(net_config);
    net.train(harvest.set);

    ClosureResult result;
    result.records = std::move(harvest.records);
    const std::size_t trained = result.records.size();
    result.test_iterations = close_holes_with_model(dut, harvest.db, net, harvest.set, config,
                                                    prng, result.records, trained);
    result.total_iterations = trained + result.test_iterations;
    result.final_coverage = harvest.db.coverage_fraction();
    result.converged = result.final_coverage >= config.goal;
    return result;
}

std::size_t argmax_index(std::span<const double> scores) {
    if (scores.empty()) {
        throw std::invalid_argument("argmax of empty score list");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

BugHuntResult run_failure_directed(const Dut& dut, const EngineConfig& config,
                                   std::size_t test_iterations, std::size_t candidate_pool) {
    config.validate();
    config.constraints.validate(dut.spec());
    if (candidate_pool == 0) {
        throw std::invalid_argument("candidate pool must be positive");
    }
    CoverageDatabase db(default_model(dut.spec()), dut.spec());
    Prng prng(config.base_seed);
    const std::size_t train_tx = config.resolve_train_transactions(db.total_bins());

    BugHuntResult result;
    TrainingSet set;
    for (std::size_t t = 0; t < train_tx; ++t) {
        const StimulusVector stimulus = random_stimulus(dut.spec(), config.constraints, prng);
        RunRecord record = apply_transaction(dut, db, stimulus, t, Phase::Train,
                                             mux_select(Phase::Train, false, false));
        set.push_back({stimulus_bits(dut.spec(), stimulus),
                       {record.status == TestStatus::Fail ? 1.0 : 0.0},
                       t});
        result.records.push_back(std::move(record));
    }

    NetworkConfig net_config;
    const std::size_t bits = input_bit_count(dut.spec());
    net_config.layer_sizes = {bits, std::max<std::size_t>(8, (bits + 1 + 1) / 2), 1};
    net_config.learning_rate = 0.5;
    net_config.epochs = 30;
    net_config.init_seed = config.base_seed;
    Network net(net_config);
    net.train(set);

    std::vector<StimulusVector> pool(candidate_pool);
    std::vector<double> scores(candidate_pool);
    for (std::size_t it = 0; it < test_iterations; ++it) {
        for (std::size_t c = 0; c < candidate_pool; ++c) {
            pool[c] = random_stimulus(dut.spec(), config.constraints, prng);
            scores[c] = net.forward(stimulus_bits(dut.spec(), pool[c]))[0];
        }
        const StimulusVector& chosen = pool[argmax_index(scores)];

        RunRecord record = apply_transaction(dut, db, chosen, train_tx + it, Phase::Test,
                                             mux_select(Phase::Test, true, false));
        set.push_back({stimulus_bits(dut.spec(), chosen),
                       {record.status == TestStatus::Fail ? 1.0 : 0.0},
                       train_tx + it});
        if (record.status == TestStatus::Fail) {
            ++result.failures_found;
            result.failing_stimuli.push_back(chosen);
        }
        result.records.push_back(std::move(record));
        if ((it + 1) % config.retrain_interval == 0 && it + 1 < test_iterations) {
            net.train(set, config.retrain_epochs);
        }
    }
    return result;
}

std::size_t count_random_failures(const Dut& dut, std::size_t iterations, std::uint64_t seed) {
    Prng prng(seed);
    ConstraintSet constraints;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < iterations; ++i) {
        const StimulusVector stimulus = random_stimulus(dut.spec(), constraints, prng);
        if (check(dut.eval(stimulus), dut.golden(stimulus)) == TestStatus::Fail) {
            ++failures;
        }
    }
    return failures;
}

MethodStats summarize_outcomes(std::vector<SeedOutcome> seeds) {
    MethodStats stats;
    stats.seeds = std::move(seeds);
    std::vector<std::optional<std::size_t>> values;
    for (const auto& outcome : stats.seeds) {
        values.push_back(outcome.iterations);
        if (outcome.converged) {
            ++stats.converged_count;
            if (!stats.min_iterations || *outcome.iterations < *stats.min_iterations) {
                stats.min_iterations = outcome.iterations;
            }
            if (!stats.max_iterations || *outcome.iterations > *stats.max_iterations) {
                stats.max_iterations = outcome.iterations;
            }
        }
    }
    if (!values.empty()) {
        // Lower median with non-converged sorted last (treated as infinite).
        std::sort(values.begin(), values.end(),
                  [](const auto& a, const auto& b) {
                      if (a && b) return *a < *b;
                      return a.has_value() && !b.has_value();
                  });
        stats.median_iterations = values[(values.size() - 1) / 2];
    }
    return stats;
}

namespace {

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

ExperimentReport compare_experiment(const std::string& dut_name,
                                    const std::vector<unsigned>& widths,
                                    std::size_t seeds_per_width, const EngineConfig& config) {
    if (widths.empty()) {
        throw std::invalid_argument("width list is empty");
    }
    if (seeds_per_width == 0) {
        throw std::invalid_argument("seeds_per_width must be positive");
    }
    config.validate();

    ExperimentReport report;
    report.dut = dut_name;
    report.seeds_per_width = seeds_per_width;
    report.iteration_cap = config.iteration_cap;
    report.base_seed = config.base_seed;
    report.goal = config.goal;
    report.train_transactions = config.train_transactions;
    report.retrain_interval = config.retrain_interval;
    report.per_bin_model_attempts = config.per_bin_model_attempts;
    report.retrain_epochs = config.retrain_epochs;
    report.bin_order = config.bin_order;
    report.tool_version = kVersion;
    report.timestamp = iso8601_now();

    for (unsigned width : widths) {
        const auto dut = make_dut(dut_name, width);
        const CoverageModel model = default_model(dut->spec());
        std::vector<SeedOutcome> random_outcomes;
        std::vector<SeedOutcome> ann_outcomes;
        for (std::size_t s = 0; s < seeds_per_width; ++s) {
            const std::uint64_t seed = config.base_seed + width * 1000ULL + s;
            EngineConfig run_config = config;
            run_config.base_seed = seed;

            const ClosureResult random_run = run_random_to_closure(*dut, model, run_config);
            random_outcomes.push_back({seed, random_run.converged,
                                       random_run.converged
                                           ? std::optional<std::size_t>(random_run.test_iterations)
                                           : std::nullopt,
                                       random_run.total_iterations, random_run.final_coverage});

            const ClosureResult ann_run = run_ml_to_closure(*dut, model, run_config);
            ann_outcomes.push_back({seed, ann_run.converged,
                                    ann_run.converged
                                        ? std::optional<std::size_t>(ann_run.test_iterations)
                                        : std::nullopt,
                                    ann_run.total_iterations, ann_run.final_coverage});
        }
        WidthResult row;
        row.width = width;
        row.random = summarize_outcomes(std::move(random_outcomes));
        row.ann = summarize_outcomes(std::move(ann_outcomes));
        report.widths.push_back(std::move(row));
    }
    return report;
}

}  // namespace stimnet
