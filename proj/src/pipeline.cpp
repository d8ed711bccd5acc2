#include "thermocast/pipeline.hpp"

#include <algorithm>

#include "thermocast/error.hpp"
#include "thermocast/kernels.hpp"

namespace thermocast {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

std::size_t origin_ceiling(const Dataset& data, std::span<const std::size_t> origins, std::size_t horizon) {
    for (auto t : origins)
        if (t + horizon >= data.frame.size()) throw DataError("forecast window runs past the end of the frame");
    return origins.empty() ? 0 : *std::max_element(origins.begin(), origins.end());
}

}  // namespace

Dataset make_dataset(SensorFrame frame, std::optional<PartitionSpec> partition) {
    if (!frame.has(Channel::Temperature)) throw DataError("frame has no temperature channel");
    Dataset data;
    data.partition = partition ? *partition : default_partition(frame);
    validate_partition(data.partition, frame.size());
    data.stats = compute_norm_stats(slice(frame, data.partition.train));
    data.frame = std::move(frame);
    return data;
}

std::string_view split_name(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "?";
}

Split split_from_name(std::string_view name) {
    if (name == "train") return Split::Train;
    if (name == "validation") return Split::Validation;
    if (name == "test") return Split::Test;
    throw ConfigError("unknown partition '" + std::string(name) + "' (train, validation, test)");
}

IndexRange split_range(const PartitionSpec& partition, Split split) {
    switch (split) {
        case Split::Train: return partition.train;
        case Split::Validation: return partition.validation;
        case Split::Test: return partition.test;
    }
    return partition.train;
}

std::string model_label(const AnyModel& model) {
    return std::visit(Overloaded{[](const MlpModel& m) { return m.id; },
                                 [](const EtsModel& m) { return m.name(); },
                                 [](const ArimaModel& m) { return m.name(); },
                                 [](const EnsembleModel& m) { return std::string(strategy_name(m.spec.strategy)); }},
                      model);
}

std::size_t model_horizon(const AnyModel& model) {
    return std::visit(Overloaded{[](const MlpModel& m) { return m.window.horizon; },
                                 [](const EtsModel&) { return std::size_t{0}; },
                                 [](const ArimaModel&) { return std::size_t{0}; },
                                 [](const EnsembleModel& m) {
                                     return m.members.empty() ? std::size_t{0} : m.members.front().window.horizon;
                                 }},
                      model);
}

std::size_t model_max_past(const AnyModel& model) {
    return std::visit(Overloaded{[](const MlpModel& m) { return m.window.max_past(); },
                                 [](const EtsModel&) { return std::size_t{0}; },
                                 [](const ArimaModel&) { return std::size_t{2}; },
                                 [](const EnsembleModel& m) {
                                     std::size_t past = 0;
                                     for (const auto& member : m.members) past = std::max(past, member.window.max_past());
                                     return past;
                                 }},
                      model);
}

MlpConfig fit_config(MlpConfig config, const WindowSpec& window) {
    config.inputs = window.input_dim();
    config.outputs = window.horizon;
    return config;
}

TrainedMlp train_model(const Dataset& data, const WindowSpec& window, const MlpConfig& config, std::string id) {
    const auto cfg = fit_config(config, window);
    cfg.validate();
    const auto train_set = build_patterns(data.frame, window, data.stats, data.partition.train);
    const auto val_set = build_patterns(data.frame, window, data.stats, data.partition.validation);
    auto result = train(Mlp(cfg), train_set, val_set, cfg);
    TrainedMlp out;
    out.model.id = std::move(id);
    out.model.window = window;
    out.model.stats = data.stats;
    out.model.net = std::move(result.net);
    out.report = std::move(result.report);
    return out;
}

std::vector<std::size_t> evaluation_origins(const Dataset& data, Split split, std::size_t horizon,
                                            std::size_t max_past) {
    WindowSpec spec;
    spec.target_past = std::max<std::size_t>(max_past, 1);
    spec.horizon = horizon;
    return admissible_origins(data.frame.size(), spec, split_range(data.partition, split));
}

std::vector<double> window_actuals(const Dataset& data, std::span<const std::size_t> origins, std::size_t horizon) {
    origin_ceiling(data, origins, horizon);
    const auto& d = data.frame.at(Channel::Temperature);
    std::vector<double> out;
    out.reserve(origins.size() * horizon);
    for (auto t : origins)
        for (std::size_t z = 1; z <= horizon; ++z) out.push_back(d[t + z]);
    return out;
}

void check_compatible(const AnyModel& model, const SensorFrame& frame) {
    auto check_window = [&frame](const WindowSpec& window) {
        for (const auto& [channel, past] : window.covariate_past)
            if (!frame.has(channel))
                throw DataError(std::string("model reads covariate ") + channel_symbol(channel) +
                                " which the data does not provide");
    };
    if (!frame.has(Channel::Temperature)) throw DataError("data has no temperature channel");
    if (const auto* m = std::get_if<MlpModel>(&model)) check_window(m->window);
    if (const auto* e = std::get_if<EnsembleModel>(&model))
        for (const auto& m : e->members) check_window(m.window);
}

ForecastMatrix forecast(const MlpModel& model, const Dataset& data, std::span<const std::size_t> origins) {
    check_compatible(model, data.frame);
    // Inputs use the model's own training statistics, not the dataset's.
    const auto patterns = build_patterns_at(data.frame, model.window, model.stats, origins);
    const auto raw = kernels::parallel::forward_batch(model.net, patterns);
    ForecastMatrix out;
    out.horizon = model.window.horizon;
    out.origins.assign(origins.begin(), origins.end());
    out.values.resize(raw.size());
    for (std::size_t r = 0; r < patterns.rows(); ++r) {
        const auto row = invert_difference({raw.data() + r * out.horizon, out.horizon}, patterns.anchors[r]);
        std::copy(row.begin(), row.end(), out.values.begin() + static_cast<std::ptrdiff_t>(r * out.horizon));
    }
    return out;
}

ForecastMatrix forecast(const EtsModel& model, const Dataset& data, std::span<const std::size_t> origins,
                        std::size_t horizon) {
    const std::size_t last = origin_ceiling(data, origins, horizon);
    const std::size_t first = data.partition.train.begin;
    const auto& d = data.frame.at(Channel::Temperature);
    for (auto t : origins)
        if (t < first) throw DataError("ETS origin precedes the training data");
    const std::span<const double> history(d.data() + first, last + 1 - first);
    const auto run = ets_filter(model.error, model.trend, model.params, history);
    ForecastMatrix out;
    out.horizon = horizon;
    out.origins.assign(origins.begin(), origins.end());
    out.values.reserve(origins.size() * horizon);
    for (auto t : origins) {
        const auto row = forecast_ets(model, run.states[t - first], horizon);
        out.values.insert(out.values.end(), row.begin(), row.end());
    }
    return out;
}

ForecastMatrix forecast(const ArimaModel& model, const Dataset& data, std::span<const std::size_t> origins,
                        std::size_t horizon) {
    origin_ceiling(data, origins, horizon);
    const auto& d = data.frame.at(Channel::Temperature);
    ForecastMatrix out;
    out.horizon = horizon;
    out.origins.assign(origins.begin(), origins.end());
    out.values.reserve(origins.size() * horizon);
    std::vector<int> future(horizon);
    for (auto t : origins) {
        if (t < 2) throw DataError("ARIMA origin needs three past values");
        for (std::size_t z = 0; z < horizon; ++z) future[z] = data.frame.hour(t + 1 + z);
        const auto row = forecast_arima(model, {d.data() + t - 2, 3}, future, horizon);
        out.values.insert(out.values.end(), row.begin(), row.end());
    }
    return out;
}

ForecastMatrix forecast(const EnsembleModel& model, const Dataset& data, std::span<const std::size_t> origins) {
    std::vector<ForecastMatrix> parts;
    parts.reserve(model.members.size());
    for (const auto& member : model.members) parts.push_back(forecast(member, data, origins));
    return combine_forecasts(model.spec, parts);
}

ForecastMatrix forecast(const AnyModel& model, const Dataset& data, std::span<const std::size_t> origins,
                        std::size_t horizon) {
    return std::visit(Overloaded{[&](const MlpModel& m) { return forecast(m, data, origins); },
                                 [&](const EtsModel& m) { return forecast(m, data, origins, horizon); },
                                 [&](const ArimaModel& m) { return forecast(m, data, origins, horizon); },
                                 [&](const EnsembleModel& m) { return forecast(m, data, origins); }},
                      model);
}

std::vector<double> training_target(const Dataset& data) {
    const auto& d = data.frame.at(Channel::Temperature);
    const auto r = data.partition.train;
    return {d.begin() + static_cast<std::ptrdiff_t>(r.begin), d.begin() + static_cast<std::ptrdiff_t>(r.end)};
}

std::vector<int> training_hours(const Dataset& data) {
    std::vector<int> hours;
    for (std::size_t i = data.partition.train.begin; i < data.partition.train.end; ++i)
        hours.push_back(data.frame.hour(i));
    return hours;
}

std::vector<ModelReport> evaluate_models(std::span<const AnyModel> models, std::span<const std::string> labels,
                                         const Dataset& data, Split split) {
    if (models.empty()) throw ConfigError("no models to evaluate");
    if (labels.size() != models.size()) throw ConfigError("one label per model required");
    std::size_t horizon = 0;
    std::size_t max_past = 0;
    for (const auto& m : models) {
        check_compatible(m, data.frame);
        const auto z = model_horizon(m);
        if (z != 0) {
            if (horizon != 0 && z != horizon) throw DataError("models disagree on the forecast horizon");
            horizon = z;
        }
        max_past = std::max(max_past, model_max_past(m));
    }
    if (horizon == 0) horizon = 12;
    const auto origins = evaluation_origins(data, split, horizon, max_past);
    const auto actuals = window_actuals(data, origins, horizon);
    std::vector<ModelReport> reports;
    for (std::size_t i = 0; i < models.size(); ++i)
        reports.push_back(evaluate(labels[i], forecast(models[i], data, origins, horizon), actuals));
    return reports;
}

}  // namespace thermocast
