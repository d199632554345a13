// Command-line frontend: coverage closure runs, random-vs-model
// comparison sweeps, failure-directed bug hunts, report rendering.
//
// Exit codes: 0 success (close: converged), 2 close ran fine but did not
// reach the goal, 3 usage or configuration errors.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stimnet/config.hpp"
#include "stimnet/coverage.hpp"
#include "stimnet/dut.hpp"
#include "stimnet/engine.hpp"
#include "stimnet/network.hpp"
#include "stimnet/reporting.hpp"
#include "stimnet/version.hpp"

namespace {

using namespace stimnet;

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 2;
constexpr int kExitUsage = 3;

struct CloseArgs {
    std::string dut = "comparator";
    unsigned width = 2;
    std::string method = "random";
    std::uint64_t seed = 1;
    std::optional<std::size_t> cap;
    std::optional<double> goal;
    std::optional<std::size_t> train_transactions;
    std::optional<std::size_t> retrain_interval;
    std::optional<std::size_t> attempts;
    std::optional<std::size_t> retrain_epochs;
    std::string bin_order;
    std::string config_path;
    std::string log_path;
    std::string svg_path;
    std::string save_model;
    std::string load_model;
};

// Config-file values first, explicit flags on top.
ExperimentConfig merge_close_config(const CloseArgs& args, const CLI::App& cmd) {
    ExperimentConfig config;
    if (!args.config_path.empty()) {
        config = load_config(args.config_path);
    }
    if (cmd.count("--dut")) config.dut = args.dut;
    if (cmd.count("--width")) config.width = args.width;
    if (cmd.count("--seed")) config.engine.base_seed = args.seed;
    if (args.cap) config.engine.iteration_cap = *args.cap;
    if (args.goal) config.engine.goal = *args.goal;
    if (args.train_transactions) config.engine.train_transactions = args.train_transactions;
    if (args.retrain_interval) config.engine.retrain_interval = *args.retrain_interval;
    if (args.attempts) config.engine.per_bin_model_attempts = *args.attempts;
    if (args.retrain_epochs) config.engine.retrain_epochs = *args.retrain_epochs;
    if (!args.bin_order.empty()) {
        config.engine.bin_order =
            args.bin_order == "random" ? BinOrder::Random : BinOrder::LowestFirst;
    }
    if (cmd.count("--log")) config.log_path = args.log_path;
    if (cmd.count("--save-model")) config.model_path = args.save_model;
    return config;
}

int cmd_close(const CloseArgs& args, const CLI::App& cmd) {
    ExperimentConfig config = merge_close_config(args, cmd);
    const auto dut = make_dut(config.dut, config.width);
    const CoverageModel model = resolve_coverage_model(config.coverage_model, dut->spec());
    config.engine.constraints = resolve_constraints(config.constraints, dut->spec());

    ClosureResult result;
    if (args.method == "random") {
        result = run_random_to_closure(*dut, model, config.engine);
    } else if (!args.load_model.empty()) {
        // Reuse a saved predictor: harvest data for the warm database and
        // retraining, but skip the initial training pass.
        Prng prng(config.engine.base_seed);
        TrainingHarvest harvest = collect_training_data(*dut, model, config.engine, prng);
        Network net = load_network(args.load_model);
        if (net.input_size() != harvest.db.total_bins() ||
            net.output_size() != input_bit_count(dut->spec())) {
            throw std::invalid_argument("loaded model dimensions do not match this dut/model");
        }
        result.records = std::move(harvest.records);
        const std::size_t trained = result.records.size();
        result.test_iterations = close_holes_with_model(*dut, harvest.db, net, harvest.set,
                                                        config.engine, prng, result.records,
                                                        trained);
        result.total_iterations = trained + result.test_iterations;
        result.final_coverage = harvest.db.coverage_fraction();
        result.converged = result.final_coverage >= config.engine.goal;
        if (config.model_path) save_network(net, *config.model_path);
    } else {
        result = run_ml_to_closure(*dut, model, config.engine);
        if (config.model_path) {
            // Rebuild deterministically to persist the trained predictor.
            Prng prng(config.engine.base_seed);
            TrainingHarvest harvest = collect_training_data(*dut, model, config.engine, prng);
            NetworkConfig net_config;
            if (config.engine.network) {
                net_config = *config.engine.network;
            } else {
                net_config.layer_sizes = {harvest.db.total_bins(), input_bit_count(dut->spec())};
            }
            net_config.init_seed = config.engine.base_seed;
            Network net(net_config);
            net.train(harvest.set);
            save_network(net, *config.model_path);
        }
    }

    if (config.log_path) {
        write_run_log(result.records, *config.log_path);
    }
    if (!args.svg_path.empty()) {
        write_convergence_svg({curve_from_records(result.records)}, {args.method}, args.svg_path);
    }
    std::printf("dut=%s width=%u method=%s seed=%llu\n", config.dut.c_str(), config.width,
                args.method.c_str(),
                static_cast<unsigned long long>(config.engine.base_seed));
    std::printf("converged=%s test_iterations=%zu total_iterations=%zu coverage=%.6f\n",
                result.converged ? "yes" : "no", result.test_iterations, result.total_iterations,
                result.final_coverage);
    return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_compare(const std::string& dut_name, const std::vector<unsigned>& widths,
                std::size_t seeds, const std::string& out_path, std::uint64_t seed,
                std::optional<std::size_t> cap, const std::string& config_path,
                const CLI::App& cmd) {
    ExperimentConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    std::string dut = cmd.count("--dut") || config.dut.empty() ? dut_name : config.dut;
    if (cmd.count("--seed")) config.engine.base_seed = seed;
    if (cap) config.engine.iteration_cap = *cap;

    const ExperimentReport report = compare_experiment(dut, widths, seeds, config.engine);
    write_report_json(report, out_path);
    std::fputs(format_table(report).c_str(), stdout);
    std::printf("report written to %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_bughunt(unsigned width, std::size_t iterations, std::uint64_t seed, std::size_t pool,
                std::optional<std::size_t> train_transactions, const std::string& log_path) {
    const auto dut = make_dut("alu", width);
    EngineConfig config;
    config.base_seed = seed;
    config.train_transactions = train_transactions;

    const BugHuntResult directed = run_failure_directed(*dut, config, iterations, pool);
    const std::size_t random_failures = count_random_failures(*dut, iterations, seed);
    const double ratio = random_failures == 0
                             ? static_cast<double>(directed.failures_found)
                             : static_cast<double>(directed.failures_found) /
                                   static_cast<double>(random_failures);

    std::printf("directed_failures=%zu random_failures=%zu ratio=%.2f\n",
                directed.failures_found, random_failures, ratio);
    std::printf("failing_stimuli (per-port hex, op|a|b):\n");
    for (const auto& stimulus : directed.failing_stimuli) {
        std::string line;
        char buf[24];
        for (std::size_t i = 0; i < stimulus.values.size(); ++i) {
            if (i) line += '|';
            std::snprintf(buf, sizeof buf, "%llx",
                          static_cast<unsigned long long>(stimulus.values[i]));
            line += buf;
        }
        std::printf("%s\n", line.c_str());
    }
    if (!log_path.empty()) {
        write_run_log(directed.records, log_path);
    }
    return kExitOk;
}

int cmd_report(const std::string& in_path, bool table, const std::string& svg_path) {
    const ExperimentReport report = read_report_json(in_path);
    if (table || svg_path.empty()) {
        std::fputs(format_table(report).c_str(), stdout);
    }
    if (!svg_path.empty()) {
        write_comparison_svg(report, svg_path);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coverage-driven stimulus generation with a neural predictor"};
    app.set_version_flag("--version", stimnet::kVersion);
    app.require_subcommand(1);

    CloseArgs close_args;
    auto* close = app.add_subcommand("close", "run one coverage-closure regression");
    close->add_option("--dut", close_args.dut, "dut name: comparator | alu")->capture_default_str()
        ->check(CLI::IsMember({"comparator", "alu"}));
    close->add_option("--width", close_args.width, "data port width in bits")->capture_default_str()
        ->check(CLI::Range(1u, 16u));
    close->add_option("--method", close_args.method, "stimulus method")
        ->required()
        ->check(CLI::IsMember({"random", "ann"}));
    close->add_option("--seed", close_args.seed, "base seed")->capture_default_str();
    close->add_option("--cap", close_args.cap, "test-iteration cap");
    close->add_option("--goal", close_args.goal, "coverage goal in (0,1]")
        ->check(CLI::Range(1e-9, 1.0));
    close->add_option("--train-transactions", close_args.train_transactions,
                      "training-phase transaction count (default 6x bins)");
    close->add_option("--retrain-interval", close_args.retrain_interval,
                      "test iterations between retrains");
    close->add_option("--attempts", close_args.attempts, "model attempts per bin");
    close->add_option("--retrain-epochs", close_args.retrain_epochs, "epochs per retrain");
    close->add_option("--bin-order", close_args.bin_order, "target-bin order")
        ->check(CLI::IsMember({"lowest", "random"}));
    close->add_option("--config", close_args.config_path, "JSON experiment config");
    close->add_option("--log", close_args.log_path, "write per-iteration CSV log");
    close->add_option("--svg", close_args.svg_path, "write convergence curve SVG");
    close->add_option("--save-model", close_args.save_model, "write trained model JSON");
    close->add_option("--load-model", close_args.load_model, "reuse a saved model (ann only)");

    std::string cmp_dut = "comparator";
    std::vector<unsigned> cmp_widths;
    std::size_t cmp_seeds = 10;
    std::string cmp_out;
    std::uint64_t cmp_seed = 1;
    std::optional<std::size_t> cmp_cap;
    std::string cmp_config;
    auto* compare = app.add_subcommand("compare", "random vs ann sweep across widths");
    compare->add_option("--dut", cmp_dut, "dut name")->capture_default_str()->check(CLI::IsMember({"comparator", "alu"}));
    compare->add_option("--widths", cmp_widths, "comma-separated width list")
        ->required()
        ->delimiter(',')
        ->check(CLI::Range(1u, 16u));
    compare->add_option("--seeds", cmp_seeds, "seeds per width")->capture_default_str()->check(CLI::Range(1, 1000000));
    compare->add_option("--out", cmp_out, "report JSON path")->required();
    compare->add_option("--seed", cmp_seed, "base seed")->capture_default_str();
    compare->add_option("--cap", cmp_cap, "test-iteration cap");
    compare->add_option("--config", cmp_config, "JSON experiment config");

    unsigned hunt_width = 4;
    std::size_t hunt_iterations = 0;
    std::uint64_t hunt_seed = 1;
    std::size_t hunt_pool = 256;
    std::optional<std::size_t> hunt_train;
    std::string hunt_log;
    std::string hunt_dut = "alu";
    auto* bughunt = app.add_subcommand("bughunt", "failure-directed stimulus search");
    bughunt->add_option("--dut", hunt_dut, "dut name (alu)")->check(CLI::IsMember({"alu"}));
    bughunt->add_option("--width", hunt_width, "data port width in bits")->capture_default_str()
        ->check(CLI::Range(1u, 10u));
    bughunt->add_option("--iterations", hunt_iterations, "directed test iterations")
        ->required()
        ->check(CLI::Range(1, 100000000));
    bughunt->add_option("--seed", hunt_seed, "base seed")->capture_default_str();
    bughunt->add_option("--pool", hunt_pool, "candidate pool size")->capture_default_str()->check(CLI::Range(1, 1000000));
    bughunt->add_option("--train-transactions", hunt_train, "training-phase transaction count");
    bughunt->add_option("--log", hunt_log, "write per-iteration CSV log");

    std::string rep_in;
    bool rep_table = false;
    std::string rep_svg;
    auto* report = app.add_subcommand("report", "render a stored report");
    report->add_option("--in", rep_in, "report JSON path")->required();
    report->add_flag("--table", rep_table, "print the comparison table");
    report->add_option("--svg", rep_svg, "write comparison chart SVG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return kExitUsage;
    }

    try {
        if (close->parsed()) return cmd_close(close_args, *close);
        if (compare->parsed()) {
            return cmd_compare(cmp_dut, cmp_widths, cmp_seeds, cmp_out, cmp_seed, cmp_cap,
                               cmp_config, *compare);
        }
        if (bughunt->parsed()) {
            return cmd_bughunt(hunt_width, hunt_iterations, hunt_seed, hunt_pool, hunt_train,
                               hunt_log);
        }
        if (report->parsed()) return cmd_report(rep_in, rep_table, rep_svg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
