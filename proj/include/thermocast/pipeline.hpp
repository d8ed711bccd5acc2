#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "thermocast/baselines.hpp"
#include "thermocast/ensemble.hpp"
#include "thermocast/ingest.hpp"
#include "thermocast/metrics.hpp"
#include "thermocast/mlp.hpp"
#include "thermocast/preprocess.hpp"

namespace thermocast {

/// A frame, its partition and the training-partition normalization stats.
struct Dataset {
    SensorFrame frame;
    PartitionSpec partition;
    NormStats stats;
};

Dataset make_dataset(SensorFrame frame, std::optional<PartitionSpec> partition = std::nullopt);

enum class Split { Train, Validation, Test };
std::string_view split_name(Split split);
Split split_from_name(std::string_view name);
IndexRange split_range(const PartitionSpec& partition, Split split);

/// Trained network together with everything needed to rebuild its inputs.
struct MlpModel {
    std::string id;
    WindowSpec window;
    NormStats stats;
    Mlp net;
};

struct EnsembleModel {
    EnsembleSpec spec;
    std::vector<MlpModel> members;  // same order as spec.members
};

using AnyModel = std::variant<MlpModel, EtsModel, ArimaModel, EnsembleModel>;

std::string model_label(const AnyModel& model);
std::size_t model_horizon(const AnyModel& model);
/// Largest number of past samples the model reads at an origin.
std::size_t model_max_past(const AnyModel& model);

/// Fills in input and output sizes of `config` from `window`.
MlpConfig fit_config(MlpConfig config, const WindowSpec& window);

struct TrainedMlp {
    MlpModel model;
    TrainReport report;
};

/// Trains on the training partition with early stopping on the validation
/// partition. Validation windows may read lags from the end of training.
TrainedMlp train_model(const Dataset& data, const WindowSpec& window, const MlpConfig& config, std::string id = "mlp");

/// Shared forecast origins of a partition: every t with t+1..t+Z inside the
/// range, starting no earlier than one step before it.
std::vector<std::size_t> evaluation_origins(const Dataset& data, Split split, std::size_t horizon,
                                            std::size_t max_past = 0);

/// Absolute targets at each origin, rows x horizon.
std::vector<double> window_actuals(const Dataset& data, std::span<const std::size_t> origins, std::size_t horizon);

/// Throws DataError when the frame lacks a channel the model reads.
void check_compatible(const AnyModel& model, const SensorFrame& frame);

ForecastMatrix forecast(const MlpModel& model, const Dataset& data, std::span<const std::size_t> origins);
/// The fitted recursions are run from the start of training up to each origin.
ForecastMatrix forecast(const EtsModel& model, const Dataset& data, std::span<const std::size_t> origins,
                        std::size_t horizon);
ForecastMatrix forecast(const ArimaModel& model, const Dataset& data, std::span<const std::size_t> origins,
                        std::size_t horizon);
ForecastMatrix forecast(const EnsembleModel& model, const Dataset& data, std::span<const std::size_t> origins);
ForecastMatrix forecast(const AnyModel& model, const Dataset& data, std::span<const std::size_t> origins,
                        std::size_t horizon);

/// Training-partition target values and hours, for baseline fitting.
std::vector<double> training_target(const Dataset& data);
std::vector<int> training_hours(const Dataset& data);

/// Evaluates each model on the same origins of `split`. All models must share
/// the horizon.
std::vector<ModelReport> evaluate_models(std::span<const AnyModel> models, std::span<const std::string> labels,
                                         const Dataset& data, Split split);

}  // namespace thermocast
