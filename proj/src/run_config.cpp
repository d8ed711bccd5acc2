#include "thermocast/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json_util.hpp"

namespace thermocast {

namespace {

using detail::field;
using detail::field_or;
using detail::json;

void only_keys(const json& object, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!object.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
    for (const auto& [key, value] : object.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; });
        if (!known) throw ConfigError((path.empty() ? key : path + "." + key) + ": unknown field");
    }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Re-raises library validation errors with the field path in front.
template <class F>
auto at_field(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::vector<Channel> covariates_field(const json& j, const std::string& key, const std::string& path) {
    const auto text = field<std::string>(j, key, path);
    return at_field(join(path, key), [&] { return parse_covariate_set(text); });
}

void parse_data(const json& j, RunConfig& cfg) {
    const std::string p = "data";
    only_keys(j, p, {"raw", "frame", "schema", "period", "max_gap"});
    if (j.contains("raw")) cfg.data.raw = cfg.base_dir / field<std::string>(j, "raw", p);
    if (j.contains("frame")) cfg.data.frame = cfg.base_dir / field<std::string>(j, "frame", p);
    if (cfg.data.raw && cfg.data.frame) throw ConfigError("data: give either raw or frame, not both");
    cfg.data.ingest.period = field_or<std::int64_t>(j, "period", p, 900);
    cfg.data.ingest.max_gap = field_or<std::size_t>(j, "max_gap", p, 5);
    if (cfg.data.ingest.period <= 0) throw ConfigError("data.period: must be positive");
    cfg.data.schema = synth_schema();
    if (j.contains("schema")) {
        const auto s = field<json>(j, "schema", p);
        only_keys(s, "data.schema", {"timestamp", "columns"});
        cfg.data.schema.timestamp_column = field_or<std::string>(s, "timestamp", "data.schema", "timestamp");
        if (s.contains("columns")) {
            cfg.data.schema.columns.clear();
            const auto columns = field<json>(s, "columns", "data.schema");
            for (const auto& [symbol, column] : columns.items()) {
                const std::string where = "data.schema.columns." + symbol;
                const Channel c = at_field(where, [&] { return channel_from_symbol(symbol); });
                if (c == Channel::Hour) throw ConfigError(where + ": hour is derived from timestamps");
                if (!column.is_string()) throw ConfigError(where + ": wrong type");
                cfg.data.schema.columns[c] = column.get<std::string>();
            }
            if (!cfg.data.schema.columns.count(Channel::Temperature))
                throw ConfigError("data.schema.columns.d: missing field");
        }
    }
}

IndexRange range_field(const json& j, const std::string& key, const std::string& path) {
    const auto v = field<std::vector<std::size_t>>(j, key, path);
    if (v.size() != 2) throw ConfigError(join(path, key) + ": expected [begin, end]");
    return {v[0], v[1]};
}

void parse_partition(const json& j, RunConfig& cfg) {
    const std::string p = "partition";
    only_keys(j, p, {"train_days", "validation_days", "test_days", "train", "validation", "test"});
    cfg.partition.train_days = field_or<std::size_t>(j, "train_days", p, 21);
    cfg.partition.validation_days = field_or<std::size_t>(j, "validation_days", p, 7);
    cfg.partition.test_days = field_or<std::size_t>(j, "test_days", p, 7);
    if (j.contains("train") || j.contains("validation") || j.contains("test")) {
        PartitionSpec spec{range_field(j, "train", p), range_field(j, "validation", p), range_field(j, "test", p)};
        for (const auto* r : {&spec.train, &spec.validation, &spec.test})
            if (r->begin >= r->end) throw ConfigError("partition: ranges must be nonempty");
        cfg.partition.ranges = spec;
    }
}

void parse_window(const json& j, RunConfig& cfg) {
    const std::string p = "window";
    only_keys(j, p, {"covariates", "target_past", "covariate_past", "horizon", "normalize_target_inputs"});
    if (j.contains("covariates")) cfg.window.covariates = covariates_field(j, "covariates", p);
    cfg.window.target_past = field_or<std::size_t>(j, "target_past", p, 5);
    cfg.window.covariate_past = field_or<std::size_t>(j, "covariate_past", p, 5);
    cfg.window.horizon = field_or<std::size_t>(j, "horizon", p, 12);
    cfg.window.normalize_target_inputs = field_or<bool>(j, "normalize_target_inputs", p, false);
    if (cfg.window.target_past < 1) throw ConfigError("window.target_past: must be at least 1");
    if (cfg.window.covariate_past < 1) throw ConfigError("window.covariate_past: must be at least 1");
    if (cfg.window.horizon < 1) throw ConfigError("window.horizon: must be at least 1");
}

void parse_mlp(const json& j, RunConfig& cfg) {
    const std::string p = "mlp";
    only_keys(j, p, {"hidden", "learning_rate", "momentum", "weight_decay", "epochs", "patience", "seed"});
    auto& m = cfg.mlp;
    if (j.contains("hidden")) {
        const auto text = field<std::string>(j, "hidden", p);
        m.hidden = at_field("mlp.hidden", [&] { return parse_hidden_layout(text); });
    }
    m.learning_rate = field_or<double>(j, "learning_rate", p, m.learning_rate);
    m.momentum = field_or<double>(j, "momentum", p, m.momentum);
    m.weight_decay = field_or<double>(j, "weight_decay", p, m.weight_decay);
    m.epochs = field_or<std::size_t>(j, "epochs", p, m.epochs);
    m.patience = field_or<std::size_t>(j, "patience", p, m.patience);
    m.seed = field_or<std::uint64_t>(j, "seed", p, m.seed);
    if (!(m.learning_rate > 0.0)) throw ConfigError("mlp.learning_rate: must be positive");
    if (m.momentum < 0.0 || m.momentum >= 1.0) throw ConfigError("mlp.momentum: must lie in [0, 1)");
    if (m.weight_decay < 0.0) throw ConfigError("mlp.weight_decay: must be non-negative");
    if (m.epochs < 1) throw ConfigError("mlp.epochs: must be at least 1");
}

void parse_grid(const json& j, RunConfig& cfg) {
    const std::string p = "grid";
    only_keys(j, p,
              {"covariate_sets", "layouts", "learning_rates", "momenta", "weight_decays", "target_past", "seeds",
               "covariate_past", "epochs", "patience"});
    auto& g = cfg.grid;
    if (j.contains("covariate_sets")) {
        g.covariate_sets.clear();
        for (const auto& text : field<std::vector<std::string>>(j, "covariate_sets", p))
            g.covariate_sets.push_back(at_field("grid.covariate_sets", [&] { return parse_covariate_set(text); }));
    }
    if (j.contains("layouts")) {
        g.layouts.clear();
        for (const auto& text : field<std::vector<std::string>>(j, "layouts", p))
            g.layouts.push_back(at_field("grid.layouts", [&] { return parse_hidden_layout(text); }));
    }
    g.learning_rates = field_or(j, "learning_rates", p, g.learning_rates);
    g.momenta = field_or(j, "momenta", p, g.momenta);
    g.weight_decays = field_or(j, "weight_decays", p, g.weight_decays);
    g.target_past = field_or(j, "target_past", p, g.target_past);
    g.seeds = field_or(j, "seeds", p, g.seeds);
    g.covariate_past = field_or<std::size_t>(j, "covariate_past", p, g.covariate_past);
    g.epochs = field_or<std::size_t>(j, "epochs", p, g.epochs);
    g.patience = field_or<std::size_t>(j, "patience", p, g.patience);
    g.horizon = cfg.window.horizon;
    at_field("grid", [&] {
        g.validate();
        return 0;
    });
}

void parse_baselines(const json& j, RunConfig& cfg) {
    const std::string p = "baselines";
    only_keys(j, p, {"ets", "arima"});
    cfg.ets = field_or<bool>(j, "ets", p, true);
    if (j.contains("arima")) {
        cfg.arima.clear();
        for (const auto& name : field<std::vector<std::string>>(j, "arima", p))
            cfg.arima.push_back(at_field("baselines.arima", [&] { return hour_regressors_from_name(name); }));
    }
}

void parse_synth(const json& j, RunConfig& cfg) {
    const std::string p = "synth";
    only_keys(j, p,
              {"days", "seed", "start", "base_temperature", "diurnal_amplitude", "irradiance_peak", "inertia",
               "occupancy_lift", "heating_power", "heating_setpoint", "heating_band", "occupancy_jitter",
               "cloud_variability", "rain_probability", "temperature_noise", "irradiance_noise", "humidity_noise",
               "co2_noise"});
    auto& s = cfg.synth;
    s.days = field_or<std::size_t>(j, "days", p, s.days);
    s.seed = field_or<std::uint64_t>(j, "seed", p, s.seed);
    if (j.contains("start")) {
        const auto text = field<std::string>(j, "start", p);
        const auto ts = parse_timestamp(text);
        if (!ts) throw ConfigError("synth.start: not a timestamp");
        s.start = *ts;
    }
    s.base_temperature = field_or<double>(j, "base_temperature", p, s.base_temperature);
    s.diurnal_amplitude = field_or<double>(j, "diurnal_amplitude", p, s.diurnal_amplitude);
    s.irradiance_peak = field_or<double>(j, "irradiance_peak", p, s.irradiance_peak);
    s.inertia = field_or<double>(j, "inertia", p, s.inertia);
    s.occupancy_lift = field_or<double>(j, "occupancy_lift", p, s.occupancy_lift);
    s.heating_power = field_or<double>(j, "heating_power", p, s.heating_power);
    s.heating_setpoint = field_or<double>(j, "heating_setpoint", p, s.heating_setpoint);
    s.heating_band = field_or<double>(j, "heating_band", p, s.heating_band);
    s.occupancy_jitter = field_or<double>(j, "occupancy_jitter", p, s.occupancy_jitter);
    s.cloud_variability = field_or<double>(j, "cloud_variability", p, s.cloud_variability);
    s.rain_probability = field_or<double>(j, "rain_probability", p, s.rain_probability);
    s.temperature_noise = field_or<double>(j, "temperature_noise", p, s.temperature_noise);
    s.irradiance_noise = field_or<double>(j, "irradiance_noise", p, s.irradiance_noise);
    s.humidity_noise = field_or<double>(j, "humidity_noise", p, s.humidity_noise);
    s.co2_noise = field_or<double>(j, "co2_noise", p, s.co2_noise);
    at_field("synth", [&] {
        s.validate();
        return 0;
    });
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(j, "",
              {"format", "data", "partition", "window", "mlp", "sweep", "ensemble", "grid", "baselines", "synth",
               "mi", "split"});
    const auto format = field<std::string>(j, "format", "");
    if (format != kRunFormat) throw ConfigError("format: expected \"" + std::string(kRunFormat) + "\"");

    RunConfig cfg;
    cfg.base_dir = base_dir;
    cfg.canonical = j.dump();
    if (j.contains("data")) parse_data(j["data"], cfg);
    else cfg.data.schema = synth_schema();
    if (j.contains("partition")) parse_partition(j["partition"], cfg);
    if (j.contains("window")) parse_window(j["window"], cfg);
    if (j.contains("mlp")) parse_mlp(j["mlp"], cfg);
    if (j.contains("sweep")) {
        only_keys(j["sweep"], "sweep", {"past_sizes"});
        cfg.past_sizes = field_or(j["sweep"], "past_sizes", "sweep", cfg.past_sizes);
        if (cfg.past_sizes.empty()) throw ConfigError("sweep.past_sizes: must not be empty");
        for (auto s : cfg.past_sizes)
            if (s < 1) throw ConfigError("sweep.past_sizes: sizes must be at least 1");
    }
    if (j.contains("ensemble")) {
        only_keys(j["ensemble"], "ensemble", {"strategy"});
        const auto name = field<std::string>(j["ensemble"], "strategy", "ensemble");
        cfg.strategy = at_field("ensemble.strategy", [&] { return strategy_from_name(name); });
    }
    cfg.grid.horizon = cfg.window.horizon;
    if (j.contains("grid")) parse_grid(j["grid"], cfg);
    if (j.contains("baselines")) parse_baselines(j["baselines"], cfg);
    if (j.contains("synth")) parse_synth(j["synth"], cfg);
    if (j.contains("mi")) {
        only_keys(j["mi"], "mi", {"bins"});
        cfg.mi_bins = field_or<std::size_t>(j["mi"], "bins", "mi", 64);
        if (cfg.mi_bins < 1) throw ConfigError("mi.bins: must be at least 1");
    }
    if (j.contains("split")) {
        const auto name = field<std::string>(j, "split", "");
        cfg.split = at_field("split", [&] { return split_from_name(name); });
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path.parent_path());
}

WindowSpec window_spec(const RunConfig& config) { return window_spec(config, config.window.target_past); }

WindowSpec window_spec(const RunConfig& config, std::size_t target_past) {
    auto spec = make_window_spec(config.window.covariates, target_past, config.window.covariate_past,
                                 config.window.horizon);
    spec.normalize_target_inputs = config.window.normalize_target_inputs;
    return spec;
}

Dataset load_dataset(const RunConfig& config, std::vector<std::filesystem::path>* inputs) {
    SensorFrame frame;
    if (config.data.frame) {
        frame = read_frame_csv(*config.data.frame);
        if (inputs) inputs->push_back(*config.data.frame);
    } else if (config.data.raw) {
        const auto loaded = load_csv(*config.data.raw, config.data.schema);
        if (inputs) inputs->push_back(*config.data.raw);
        auto ingested = build_frames(loaded.series, config.data.ingest);
        if (ingested.frames.empty()) throw DataError("no usable frame in " + config.data.raw->string());
        frame = std::move(ingested.frames.front());
    } else {
        throw ConfigError("data: no input given (set data.raw or data.frame, or pass --data)");
    }
    std::optional<PartitionSpec> partition = config.partition.ranges;
    if (!partition)
        partition = default_partition(frame, config.partition.train_days, config.partition.validation_days,
                                      config.partition.test_days);
    return make_dataset(std::move(frame), partition);
}

}  // namespace thermocast
