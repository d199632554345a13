#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "stimnet/dut.hpp"
#include "stimnet/stimulus.hpp"

namespace stimnet {

struct NetworkConfig {
    std::vector<std::size_t> layer_sizes;  // [n_in, hidden..., n_out], >= 2 entries
    double learning_rate = 0.5;
    std::size_t epochs = 30;
    std::uint64_t init_seed = 1;

    void validate() const;  // throws std::invalid_argument
    bool operator==(const NetworkConfig&) const = default;
};

struct TrainingPair {
    std::vector<double> feature;  // values in [0, 1]
    std::vector<double> target;   // values in [0, 1]
    std::size_t iteration = 0;    // provenance: source transaction id
};

using TrainingSet = std::vector<TrainingPair>;

// Feed-forward net, logistic sigmoid on every layer, trained by
// per-sample SGD on MSE. All randomness (init draws, epoch shuffles)
// comes from one splitmix64 stream seeded with init_seed, so training is
// fully reproducible.
class Network {
public:
    struct Layer {
        std::size_t n_in = 0;
        std::size_t n_out = 0;
        std::vector<double> weights;  // row-major, n_out x n_in
        std::vector<double> biases;   // n_out, zero-initialized
    };

    explicit Network(NetworkConfig config);

    const NetworkConfig& config() const { return config_; }
    std::size_t input_size() const { return config_.layer_sizes.front(); }
    std::size_t output_size() const { return config_.layer_sizes.back(); }

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    std::vector<double> forward(const std::vector<double>& x) const;

    // One epoch = shuffle, then per-sample gradient steps. Returns the
    // per-epoch mean of the sample losses L = (1/n_out) * sum (y - t)^2.
    std::vector<double> train(const TrainingSet& set);
    std::vector<double> train(const TrainingSet& set, std::size_t epochs);

    double mse(const TrainingSet& set) const;

    // Backprop gradients for one pair, flattened per layer as weights
    // (row-major) then biases. No parameter update.
    std::vector<double> gradients(const TrainingPair& pair) const;

    std::size_t parameter_count() const;
    double parameter(std::size_t index) const;
    void set_parameter(std::size_t index, double value);

private:
    void sgd_step(const TrainingPair& pair, const std::vector<std::size_t>& feature_nonzeros,
                  double* sample_loss);

    NetworkConfig config_;
    std::vector<Layer> layers_;
    Prng prng_;
};

// Max over all parameters of the relative disagreement between the
// backprop gradient and a central finite difference (h = 1e-5):
// |g_bp - g_fd| / max(1e-8, |g_bp| + |g_fd|).
double gradient_check(Network& net, const TrainingPair& pair);

// Run the one-hot coverage target through the net, threshold outputs at
// 0.5 (ties round to 1) and pack the bits into port values, canonical
// port order, MSB first.
StimulusVector predict_stimulus(const Network& net, const std::vector<double>& target,
                                const DutSpec& spec);

nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace stimnet
