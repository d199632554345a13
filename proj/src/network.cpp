#include "stimnet/network.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace stimnet {

namespace {

double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

// Indices of the non-zero entries of an activation vector. Zero terms
// contribute nothing to dot products or weight gradients, and one-hot
// coverage features make layer-0 work collapse from O(B) to O(1).
void nonzero_indices(const std::vector<double>& x, std::vector<std::size_t>& out) {
    out.clear();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0) out.push_back(i);
    }
}

}  // namespace

void NetworkConfig::validate() const {
    if (layer_sizes.size() < 2) {
        throw std::invalid_argument("network needs at least 2 layers");
    }
    for (std::size_t n : layer_sizes) {
        if (n == 0) throw std::invalid_argument("layer sizes must be >= 1");
    }
    if (!(learning_rate > 0.0) && learning_rate != 0.0) {
        throw std::invalid_argument("learning rate must be >= 0");
    }
    if (epochs == 0) {
        throw std::invalid_argument("epochs must be positive");
    }
}

Network::Network(NetworkConfig config) : config_(std::move(config)), prng_(config_.init_seed) {
    config_.validate();
    for (std::size_t li = 0; li + 1 < config_.layer_sizes.size(); ++li) {
        Layer layer;
        layer.n_in = config_.layer_sizes[li];
        layer.n_out = config_.layer_sizes[li + 1];
        const double r = std::sqrt(6.0 / static_cast<double>(layer.n_in + layer.n_out));
        layer.weights.resize(layer.n_out * layer.n_in);
        for (double& w : layer.weights) {
            w = -r + 2.0 * r * prng_.unit_real();
        }
        layer.biases.assign(layer.n_out, 0.0);
        layers_.push_back(std::move(layer));
    }
}

std::vector<double> Network::forward(const std::vector<double>& x) const {
    if (x.size() != input_size()) {
        throw std::invalid_argument("input size does not match network");
    }
    std::vector<double> a = x;
    std::vector<double> next;
    std::vector<std::size_t> nz;
    for (const Layer& layer : layers_) {
        nonzero_indices(a, nz);
        next.assign(layer.n_out, 0.0);
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            double z = layer.biases[o];
            const double* row = layer.weights.data() + o * layer.n_in;
            for (std::size_t k : nz) {
                z += row[k] * a[k];
            }
            next[o] = sigmoid(z);
        }
        a.swap(next);
    }
    return a;
}

namespace {

struct BackpropScratch {
    std::vector<std::vector<double>> activations;  // a_0 .. a_L
    std::vector<std::vector<double>> deltas;       // per layer
};

// Forward with stored activations, then deltas against the MSE loss
// L = (1/n_out) * sum (y - t)^2, all from the pre-update weights. nz0
// carries the precomputed non-zero indices of the feature vector.
double forward_backward(const std::vector<Network::Layer>& layers, const TrainingPair& pair,
                        const std::vector<std::size_t>& nz0, BackpropScratch& s) {
    const std::size_t L = layers.size();
    s.activations.assign(L + 1, {});
    s.deltas.assign(L, {});
    s.activations[0] = pair.feature;
    std::vector<std::size_t> nz;
    for (std::size_t li = 0; li < L; ++li) {
        const auto& layer = layers[li];
        const auto& a = s.activations[li];
        if (li > 0) nonzero_indices(a, nz);
        const auto& active = li == 0 ? nz0 : nz;
        auto& out = s.activations[li + 1];
        out.assign(layer.n_out, 0.0);
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            double z = layer.biases[o];
            const double* row = layer.weights.data() + o * layer.n_in;
            for (std::size_t k : active) {
                z += row[k] * a[k];
            }
            out[o] = sigmoid(z);
        }
    }

    const auto& y = s.activations[L];
    const double inv_n = 1.0 / static_cast<double>(y.size());
    double loss = 0.0;
    auto& delta_out = s.deltas[L - 1];
    delta_out.resize(y.size());
    for (std::size_t o = 0; o < y.size(); ++o) {
        const double err = y[o] - pair.target[o];
        loss += err * err;
        delta_out[o] = 2.0 * inv_n * err * y[o] * (1.0 - y[o]);
    }
    for (std::size_t li = L - 1; li > 0; --li) {
        const auto& layer = layers[li];
        const auto& delta = s.deltas[li];
        const auto& a_prev = s.activations[li];
        auto& delta_prev = s.deltas[li - 1];
        delta_prev.assign(layer.n_in, 0.0);
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            const double d = delta[o];
            const double* row = layer.weights.data() + o * layer.n_in;
            for (std::size_t k = 0; k < layer.n_in; ++k) {
                delta_prev[k] += row[k] * d;
            }
        }
        for (std::size_t k = 0; k < layer.n_in; ++k) {
            delta_prev[k] *= a_prev[k] * (1.0 - a_prev[k]);
        }
    }
    return loss * inv_n;
}

}  // namespace

void Network::sgd_step(const TrainingPair& pair, const std::vector<std::size_t>& nz0,
                       double* sample_loss) {
    static thread_local BackpropScratch scratch;
    const double loss = forward_backward(layers_, pair, nz0, scratch);
    if (sample_loss) *sample_loss = loss;
    const double lr = config_.learning_rate;
    std::vector<std::size_t> nz;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        Layer& layer = layers_[li];
        const auto& delta = scratch.deltas[li];
        const auto& a_prev = scratch.activations[li];
        if (li > 0) nonzero_indices(a_prev, nz);
        const auto& active = li == 0 ? nz0 : nz;
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            const double step = lr * delta[o];
            if (step != 0.0) {
                double* row = layer.weights.data() + o * layer.n_in;
                for (std::size_t k : active) {
                    row[k] -= step * a_prev[k];
                }
            }
            layer.biases[o] -= step;
        }
    }
}

std::vector<double> Network::train(const TrainingSet& set) {
    return train(set, config_.epochs);
}

std::vector<double> Network::train(const TrainingSet& set, std::size_t epochs) {
    if (set.empty()) {
        throw std::invalid_argument("training set is empty");
    }
    for (const auto& pair : set) {
        if (pair.feature.size() != input_size() || pair.target.size() != output_size()) {
            throw std::invalid_argument("training pair dimensions do not match network");
        }
        for (double v : pair.feature) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("training features must lie in [0, 1]");
            }
        }
        for (double v : pair.target) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("training targets must lie in [0, 1]");
            }
        }
    }
    std::vector<std::size_t> order(set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    // Features are immutable for the duration of the call; scan their
    // sparsity once instead of every epoch.
    std::vector<std::vector<std::size_t>> nz_cache(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        nonzero_indices(set[i].feature, nz_cache[i]);
    }

    std::vector<double> history;
    history.reserve(epochs);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = prng_.next() % (i + 1);
            std::swap(order[i], order[j]);
        }
        double total = 0.0;
        for (std::size_t idx : order) {
            double loss = 0.0;
            sgd_step(set[idx], nz_cache[idx], &loss);
            total += loss;
        }
        history.push_back(total / static_cast<double>(set.size()));
    }
    return history;
}

double Network::mse(const TrainingSet& set) const {
    if (set.empty()) {
        throw std::invalid_argument("training set is empty");
    }
    double total = 0.0;
    for (const auto& pair : set) {
        const std::vector<double> y = forward(pair.feature);
        double loss = 0.0;
        for (std::size_t o = 0; o < y.size(); ++o) {
            const double err = y[o] - pair.target[o];
            loss += err * err;
        }
        total += loss / static_cast<double>(y.size());
    }
    return total / static_cast<double>(set.size());
}

std::vector<double> Network::gradients(const TrainingPair& pair) const {
    BackpropScratch scratch;
    std::vector<std::size_t> nz0;
    nonzero_indices(pair.feature, nz0);
    forward_backward(layers_, pair, nz0, scratch);
    std::vector<double> grads;
    grads.reserve(parameter_count());
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const Layer& layer = layers_[li];
        const auto& delta = scratch.deltas[li];
        const auto& a_prev = scratch.activations[li];
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            for (std::size_t k = 0; k < layer.n_in; ++k) {
                grads.push_back(delta[o] * a_prev[k]);
            }
        }
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            grads.push_back(delta[o]);
        }
    }
    return grads;
}

std::size_t Network::parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers_) {
        count += layer.weights.size() + layer.biases.size();
    }
    return count;
}

double Network::parameter(std::size_t index) const {
    for (const auto& layer : layers_) {
        if (index < layer.weights.size()) return layer.weights[index];
        index -= layer.weights.size();
        if (index < layer.biases.size()) return layer.biases[index];
        index -= layer.biases.size();
    }
    throw std::invalid_argument("parameter index out of range");
}

void Network::set_parameter(std::size_t index, double value) {
    for (auto& layer : layers_) {
        if (index < layer.weights.size()) {
            layer.weights[index] = value;
            return;
        }
        index -= layer.weights.size();
        if (index < layer.biases.size()) {
            layer.biases[index] = value;
            return;
        }
        index -= layer.biases.size();
    }
    throw std::invalid_argument("parameter index out of range");
}

namespace {

double pair_loss(const Network& net, const TrainingPair& pair) {
    const std::vector<double> y = net.forward(pair.feature);
    double loss = 0.0;
    for (std::size_t o = 0; o < y.size(); ++o) {
        const double err = y[o] - pair.target[o];
        loss += err * err;
    }
    return loss / static_cast<double>(y.size());
}

}  // namespace

double gradient_check(Network& net, const TrainingPair& pair) {
    const double h = 1e-5;
    const std::vector<double> bp = net.gradients(pair);
    double worst = 0.0;
    for (std::size_t i = 0; i < bp.size(); ++i) {
        const double original = net.parameter(i);
        net.set_parameter(i, original + h);
        const double plus = pair_loss(net, pair);
        net.set_parameter(i, original - h);
        const double minus = pair_loss(net, pair);
        net.set_parameter(i, original);
        const double fd = (plus - minus) / (2.0 * h);
        const double rel = std::abs(bp[i] - fd) / std::max(1e-8, std::abs(bp[i]) + std::abs(fd));
        worst = std::max(worst, rel);
    }
    return worst;
}

StimulusVector predict_stimulus(const Network& net, const std::vector<double>& target,
                                const DutSpec& spec) {
    if (target.size() != net.input_size()) {
        throw std::invalid_argument("target size does not match network input");
    }
    if (net.output_size() != input_bit_count(spec)) {
        throw std::invalid_argument("network output size does not match dut input bits");
    }
    const std::vector<double> y = net.forward(target);
    std::vector<bool> bits(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        bits[i] = y[i] >= 0.5;  // ties round up
    }
    return stimulus_from_bits(spec, bits);
}

nlohmann::json network_to_json(const Network& net) {
    nlohmann::json j;
    j["layer_sizes"] = net.config().layer_sizes;
    j["activation"] = "sigmoid";
    j["init_seed"] = net.config().init_seed;
    j["weights"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (const auto& layer : net.layers()) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t k = 0; k < layer.n_in; ++k) {
                row.push_back(layer.weights[o * layer.n_in + k]);
            }
            rows.push_back(std::move(row));
        }
        j["weights"].push_back(std::move(rows));
        j["biases"].push_back(layer.biases);
    }
    return j;
}

Network network_from_json(const nlohmann::json& j) {
    NetworkConfig config;
    config.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    config.init_seed = j.at("init_seed").get<std::uint64_t>();
    if (j.at("activation").get<std::string>() != "sigmoid") {
        throw std::invalid_argument("unsupported activation");
    }
    Network net(config);
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != net.layers().size() || biases.size() != net.layers().size()) {
        throw std::invalid_argument("layer count mismatch in serialized network");
    }
    for (std::size_t li = 0; li < net.layers().size(); ++li) {
        auto& layer = net.layers()[li];
        const auto& rows = weights[li];
        if (rows.size() != layer.n_out) {
            throw std::invalid_argument("weight row count mismatch");
        }
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            const auto& row = rows[o];
            if (row.size() != layer.n_in) {
                throw std::invalid_argument("weight column count mismatch");
            }
            for (std::size_t k = 0; k < layer.n_in; ++k) {
                layer.weights[o * layer.n_in + k] = row[k].get<double>();
            }
        }
        const auto b = biases[li].get<std::vector<double>>();
        if (b.size() != layer.n_out) {
            throw std::invalid_argument("bias count mismatch");
        }
        layer.biases = b;
    }
    return net;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << network_to_json(net).dump(2) << "\n";
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    nlohmann::json j;
    in >> j;
    return network_from_json(j);
}

}  // namespace stimnet
