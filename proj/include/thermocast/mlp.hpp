#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermocast/error.hpp"
#include "thermocast/preprocess.hpp"
#include "thermocast/random.hpp"

namespace thermocast {

enum class Activation { Tanh, Logistic, Linear };

std::string_view activation_name(Activation activation);
Activation activation_from_name(std::string_view name);

struct HiddenLayer {
    std::size_t units = 8;
    Activation activation = Activation::Tanh;

    bool operator==(const HiddenLayer&) const = default;
};

/// Parses "24t-16t" style layouts (t = tanh, l = logistic).
std::vector<HiddenLayer> parse_hidden_layout(std::string_view text);
std::string format_hidden_layout(const std::vector<HiddenLayer>& layers);

struct MlpConfig {
    std::size_t inputs = 0;
    std::vector<HiddenLayer> hidden{{8, Activation::Tanh}};
    std::size_t outputs = 12;
    double learning_rate = 0.005;
    double momentum = 0.005;
    double weight_decay = 1e-6;
    std::size_t epochs = 2000;
    std::size_t patience = 50;
    std::uint64_t seed = 42;

    void validate() const;
};

/// Dense layer; `weights` is outputs x inputs, row-major.
struct Layer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    Activation activation = Activation::Linear;
    std::vector<double> weights;
    std::vector<double> biases;
    std::vector<double> weight_steps;  // previous updates, for momentum
    std::vector<double> bias_steps;

    double weight(std::size_t out, std::size_t in) const { return weights[out * inputs + in]; }
};

/// Per-parameter gradient, same shapes as the network's layers.
struct Gradient {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

/// Feed-forward network with tanh/logistic hidden layers and a linear output
/// layer emitting the whole forecast window at once.
class Mlp {
public:
    Mlp() = default;
    /// Uniform Glorot initialization from the config's seed; zero biases.
    explicit Mlp(const MlpConfig& config);
    Mlp(MlpConfig config, std::vector<Layer> layers);

    const MlpConfig& config() const { return config_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    std::size_t input_dim() const { return config_.inputs; }
    std::size_t output_dim() const { return config_.outputs; }

    std::vector<double> forward(std::span<const double> input) const;
    /// Sum of squared non-bias weights.
    double weight_norm_squared() const;
    bool all_finite() const;

private:
    MlpConfig config_;
    std::vector<Layer> layers_;
};

/// Scratch buffers reused across forward/backward passes.
struct Workspace {
    std::vector<std::vector<double>> activations;  // [0] = input copy
    std::vector<std::vector<double>> deltas;
};

void forward_into(const Mlp& net, std::span<const double> input, Workspace& work);

/// E = 1/(2Z) * sum (output - target)^2 + eps/2 * sum w^2 over non-bias weights.
double loss(const Mlp& net, std::span<const double> output, std::span<const double> target, double weight_decay);

/// Exact gradient of `loss` by backpropagation. Biases carry no decay term.
Gradient gradient(const Mlp& net, std::span<const double> input, std::span<const double> target,
                  double weight_decay);

/// Applies `update = -rate * grad + momentum * previous_update` to every
/// parameter and stores the update for the next step.
void apply_update(Mlp& net, const Gradient& grad, double learning_rate, double momentum);

enum class StopReason { EpochBudget, EarlyStopping };
std::string_view stop_reason_name(StopReason reason);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double validation_mae = 0.0;  // absolute units, after reconstruction
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_validation_mae = 0.0;
    StopReason stop_reason = StopReason::EpochBudget;
};

void write_train_report_csv(const std::filesystem::path& path, const TrainReport& report);

class TrainingDiverged : public DivergenceError {
public:
    TrainingDiverged(const std::string& what, TrainReport report)
        : DivergenceError(what), report_(std::move(report)) {}
    const TrainReport& report() const { return report_; }

private:
    TrainReport report_;
};

struct TrainResult {
    Mlp net;
    TrainReport report;
};

/// Online backpropagation with momentum and weight decay. Each epoch visits
/// the training windows in a seeded random order; the parameters of the epoch
/// with the lowest validation MAE are returned.
TrainResult train(Mlp net, const PatternSet& train_set, const PatternSet& validation_set, const MlpConfig& config);

/// Forward pass mapped back to absolute values from the window's anchor.
std::vector<double> predict_window(const Mlp& net, std::span<const double> input, double anchor);

/// Mean over windows of the per-window MAE of reconstructed forecasts.
double validation_mae(const Mlp& net, const PatternSet& patterns);

}  // namespace thermocast
