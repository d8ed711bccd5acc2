#include "thermocast/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csv_util.hpp"
#include "thermocast/kernels.hpp"
#include "thermocast/metrics.hpp"

namespace thermocast {

namespace {

double activate(Activation activation, double a) {
    switch (activation) {
        case Activation::Tanh: return std::tanh(a);
        case Activation::Logistic: return 1.0 / (1.0 + std::exp(-a));
        case Activation::Linear: return a;
    }
    return a;
}

// Derivative expressed through the unit's output y.
double activation_slope(Activation activation, double y) {
    switch (activation) {
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::Logistic: return y * (1.0 - y);
        case Activation::Linear: return 1.0;
    }
    return 1.0;
}

void check_layer_chain(const MlpConfig& config, const std::vector<Layer>& layers) {
    if (layers.empty()) throw ConfigError("network has no layers");
    std::size_t width = config.inputs;
    for (const auto& layer : layers) {
        if (layer.inputs != width || layer.weights.size() != layer.inputs * layer.outputs ||
            layer.biases.size() != layer.outputs)
            throw ConfigError("inconsistent layer shapes");
        width = layer.outputs;
    }
    if (width != config.outputs) throw ConfigError("last layer does not match the output size");
    if (layers.back().activation != Activation::Linear) throw ConfigError("output layer must be linear");
}

// Output-layer deltas from the data term, then hidden deltas through the
// current (pre-update) weights.
void backward_into(const Mlp& net, std::span<const double> target, Workspace& work) {
    const auto& layers = net.layers();
    const std::size_t depth = layers.size();
    work.deltas.resize(depth);
    const auto& y = work.activations.back();
    auto& out_delta = work.deltas[depth - 1];
    out_delta.resize(y.size());
    const double scale = 1.0 / static_cast<double>(y.size());
    for (std::size_t z = 0; z < y.size(); ++z)
        out_delta[z] = (y[z] - target[z]) * scale * activation_slope(layers[depth - 1].activation, y[z]);
    for (std::size_t l = depth - 1; l-- > 0;) {
        const auto& next = layers[l + 1];
        const auto& next_delta = work.deltas[l + 1];
        const auto& act = work.activations[l + 1];
        auto& delta = work.deltas[l];
        delta.assign(layers[l].outputs, 0.0);
        for (std::size_t o = 0; o < next.outputs; ++o) {
            const double d = next_delta[o];
            const double* row = next.weights.data() + o * next.inputs;
            for (std::size_t i = 0; i < next.inputs; ++i) delta[i] += row[i] * d;
        }
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= activation_slope(layers[l].activation, act[i]);
    }
}

double data_loss(std::span<const double> output, std::span<const double> target) {
    double sq = 0.0;
    for (std::size_t z = 0; z < output.size(); ++z) sq += (output[z] - target[z]) * (output[z] - target[z]);
    return sq / (2.0 * static_cast<double>(output.size()));
}

// One online step: gradient of the current pattern applied immediately.
void online_step(Mlp& net, Workspace& work, double rate, double momentum, double decay) {
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto& layer = net.layers()[l];
        const auto& x = work.activations[l];
        const auto& delta = work.deltas[l];
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            double* w = layer.weights.data() + o * layer.inputs;
            double* step = layer.weight_steps.data() + o * layer.inputs;
            const double d = delta[o];
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                step[i] = -rate * (d * x[i] + decay * w[i]) + momentum * step[i];
                w[i] += step[i];
            }
            layer.bias_steps[o] = -rate * d + momentum * layer.bias_steps[o];
            layer.biases[o] += layer.bias_steps[o];
        }
    }
}

}  // namespace

std::string_view activation_name(Activation activation) {
    switch (activation) {
        case Activation::Tanh: return "tanh";
        case Activation::Logistic: return "logistic";
        case Activation::Linear: return "linear";
    }
    return "?";
}

Activation activation_from_name(std::string_view name) {
    if (name == "tanh" || name == "t") return Activation::Tanh;
    if (name == "logistic" || name == "l") return Activation::Logistic;
    if (name == "linear") return Activation::Linear;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::vector<HiddenLayer> parse_hidden_layout(std::string_view text) {
    std::vector<HiddenLayer> layers;
    for (auto part : detail::split_fields(text, '-')) {
        if (part.size() < 2) throw ConfigError("bad hidden layout '" + std::string(text) + "'");
        const auto units = detail::parse_double(part.substr(0, part.size() - 1));
        if (!units || *units < 1 || *units != std::floor(*units))
            throw ConfigError("bad hidden layout '" + std::string(text) + "'");
        layers.push_back({static_cast<std::size_t>(*units), activation_from_name(part.substr(part.size() - 1))});
    }
    return layers;
}

std::string format_hidden_layout(const std::vector<HiddenLayer>& layers) {
    std::string out;
    for (const auto& layer : layers) {
        if (!out.empty()) out += '-';
        out += std::to_string(layer.units);
        out += layer.activation == Activation::Logistic ? 'l' : 't';
    }
    return out;
}

void MlpConfig::validate() const {
    if (inputs == 0) throw ConfigError("mlp.inputs must be positive");
    if (outputs == 0) throw ConfigError("mlp.outputs must be positive");
    if (hidden.size() > 2) throw ConfigError("mlp.hidden allows at most two layers");
    for (const auto& h : hidden) {
        if (h.units == 0) throw ConfigError("mlp.hidden units must be positive");
        if (h.activation == Activation::Linear) throw ConfigError("mlp.hidden activation must be tanh or logistic");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("mlp.learning_rate must be positive");
    if (!(momentum >= 0.0)) throw ConfigError("mlp.momentum must be non-negative");
    if (!(weight_decay >= 0.0)) throw ConfigError("mlp.weight_decay must be non-negative");
    if (epochs == 0) throw ConfigError("mlp.epochs must be positive");
}

Mlp::Mlp(const MlpConfig& config) : config_(config) {
    config_.validate();
    Rng rng(config_.seed);
    std::size_t fan_in = config_.inputs;
    auto add_layer = [&](std::size_t fan_out, Activation activation) {
        Layer layer;
        layer.inputs = fan_in;
        layer.outputs = fan_out;
        layer.activation = activation;
        const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        layer.weights.resize(fan_in * fan_out);
        for (auto& w : layer.weights) w = (2.0 * rng.uniform() - 1.0) * r;
        layer.biases.assign(fan_out, 0.0);
        layer.weight_steps.assign(layer.weights.size(), 0.0);
        layer.bias_steps.assign(fan_out, 0.0);
        layers_.push_back(std::move(layer));
        fan_in = fan_out;
    };
    for (const auto& h : config_.hidden) add_layer(h.units, h.activation);
    add_layer(config_.outputs, Activation::Linear);
}

Mlp::Mlp(MlpConfig config, std::vector<Layer> layers) : config_(std::move(config)), layers_(std::move(layers)) {
    check_layer_chain(config_, layers_);
    for (auto& layer : layers_) {
        if (layer.weight_steps.size() != layer.weights.size()) layer.weight_steps.assign(layer.weights.size(), 0.0);
        if (layer.bias_steps.size() != layer.biases.size()) layer.bias_steps.assign(layer.biases.size(), 0.0);
    }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
    Workspace work;
    forward_into(*this, input, work);
    return std::move(work.activations.back());
}

double Mlp::weight_norm_squared() const {
    double sum = 0.0;
    for (const auto& layer : layers_)
        for (double w : layer.weights) sum += w * w;
    return sum;
}

bool Mlp::all_finite() const {
    for (const auto& layer : layers_) {
        for (double w : layer.weights)
            if (!std::isfinite(w)) return false;
        for (double b : layer.biases)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

void forward_into(const Mlp& net, std::span<const double> input, Workspace& work) {
    if (input.size() != net.input_dim())
        throw DataError("input has " + std::to_string(input.size()) + " values, network expects " +
                        std::to_string(net.input_dim()));
    const auto& layers = net.layers();
    work.activations.resize(layers.size() + 1);
    work.activations[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        const auto& x = work.activations[l];
        auto& y = work.activations[l + 1];
        y.resize(layer.outputs);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            const double* row = layer.weights.data() + o * layer.inputs;
            double a = layer.biases[o];
            for (std::size_t i = 0; i < layer.inputs; ++i) a += row[i] * x[i];
            y[o] = activate(layer.activation, a);
        }
    }
}

double loss(const Mlp& net, std::span<const double> output, std::span<const double> target, double weight_decay) {
    if (output.size() != target.size() || output.empty()) throw DataError("loss needs equal, nonempty lengths");
    return data_loss(output, target) + 0.5 * weight_decay * net.weight_norm_squared();
}

Gradient gradient(const Mlp& net, std::span<const double> input, std::span<const double> target,
                  double weight_decay) {
    if (target.size() != net.output_dim()) throw DataError("target length does not match the network output");
    Workspace work;
    forward_into(net, input, work);
    backward_into(net, target, work);
    Gradient grad;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const auto& layer = net.layers()[l];
        const auto& x = work.activations[l];
        const auto& delta = work.deltas[l];
        std::vector<double> gw(layer.weights.size());
        for (std::size_t o = 0; o < layer.outputs; ++o)
            for (std::size_t i = 0; i < layer.inputs; ++i)
                gw[o * layer.inputs + i] = delta[o] * x[i] + weight_decay * layer.weights[o * layer.inputs + i];
        grad.weights.push_back(std::move(gw));
        grad.biases.push_back(delta);
    }
    return grad;
}

void apply_update(Mlp& net, const Gradient& grad, double learning_rate, double momentum) {
    auto& layers = net.layers();
    if (grad.weights.size() != layers.size()) throw DataError("gradient does not match the network");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& layer = layers[l];
        for (std::size_t k = 0; k < layer.weights.size(); ++k) {
            layer.weight_steps[k] = -learning_rate * grad.weights[l][k] + momentum * layer.weight_steps[k];
            layer.weights[k] += layer.weight_steps[k];
        }
        for (std::size_t k = 0; k < layer.biases.size(); ++k) {
            layer.bias_steps[k] = -learning_rate * grad.biases[l][k] + momentum * layer.bias_steps[k];
            layer.biases[k] += layer.bias_steps[k];
        }
    }
}

std::string_view stop_reason_name(StopReason reason) {
    return reason == StopReason::EarlyStopping ? "early_stopping" : "epoch_budget";
}

void write_train_report_csv(const std::filesystem::path& path, const TrainReport& report) {
    auto out = detail::open_output(path);
    out << "epoch,train_loss,validation_mae,best\n";
    for (const auto& e : report.epochs)
        out << e.epoch << ',' << detail::format_double(e.train_loss) << ',' << detail::format_double(e.validation_mae)
            << ',' << (e.epoch == report.best_epoch ? 1 : 0) << '\n';
    out << "# best_epoch=" << report.best_epoch << " stop=" << stop_reason_name(report.stop_reason) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

double validation_mae(const Mlp& net, const PatternSet& patterns) {
    if (patterns.rows() == 0) throw DataError("no validation windows");
    const auto raw = kernels::parallel::forward_batch(net, patterns);
    const std::size_t z_count = net.output_dim();
    double total = 0.0;
    for (std::size_t r = 0; r < patterns.rows(); ++r) {
        const auto forecast = invert_difference({raw.data() + r * z_count, z_count}, patterns.anchors[r]);
        total += mae(forecast, patterns.actual(r));
    }
    return total / static_cast<double>(patterns.rows());
}

TrainResult train(Mlp net, const PatternSet& train_set, const PatternSet& validation_set, const MlpConfig& config) {
    if (!(config.learning_rate > 0.0) || config.epochs == 0)
        throw ConfigError("training needs a positive learning rate and epoch budget");
    if (train_set.rows() == 0) throw DataError("no training windows");
    if (train_set.input_dim != net.input_dim() || validation_set.input_dim != net.input_dim())
        throw DataError("pattern input dimension does not match the network");
    if (train_set.horizon != net.output_dim() || validation_set.horizon != net.output_dim())
        throw DataError("pattern horizon does not match the network");

    Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train_set.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Workspace work;
    TrainReport report;
    Mlp best = net;
    double best_mae = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double epoch_loss = 0.0;
        for (std::size_t idx : order) {
            forward_into(net, train_set.input(idx), work);
            epoch_loss += data_loss(work.activations.back(), train_set.target(idx));
            backward_into(net, train_set.target(idx), work);
            online_step(net, work, config.learning_rate, config.momentum, config.weight_decay);
        }
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss / static_cast<double>(order.size()) +
                            0.5 * config.weight_decay * net.weight_norm_squared();
        if (std::isfinite(record.train_loss) && net.all_finite())
            record.validation_mae = validation_mae(net, validation_set);
        report.epochs.push_back(record);
        if (!std::isfinite(record.train_loss) || !std::isfinite(record.validation_mae) || !net.all_finite())
            throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch), report);
        if (record.validation_mae < best_mae) {
            best_mae = record.validation_mae;
            report.best_epoch = epoch;
            best = net;
            stale = 0;
        } else if (++stale > config.patience) {
            report.stop_reason = StopReason::EarlyStopping;
            break;
        }
    }
    report.best_validation_mae = best_mae;
    return {std::move(best), std::move(report)};
}

std::vector<double> predict_window(const Mlp& net, std::span<const double> input, double anchor) {
    return invert_difference(net.forward(input), anchor);
}

}  // namespace thermocast
