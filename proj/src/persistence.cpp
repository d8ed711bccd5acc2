#include "thermocast/persistence.hpp"

#include <cmath>

#include "json_util.hpp"

namespace thermocast {

namespace {

using detail::field;
using detail::field_or;
using detail::json;

json finite_array(const std::vector<double>& values, const std::string& what) {
    for (double v : values)
        if (!std::isfinite(v)) throw DataError(what + " holds a non-finite value");
    return values;
}

json stats_to_json(const NormStats& stats) {
    json j = json::object();
    for (const auto& [channel, s] : stats.channels)
        j["channels"][std::string(1, channel_symbol(channel))] = {{"mean", s.mean}, {"stddev", s.stddev}};
    j["target_delta"] = {{"mean", stats.target_delta.mean}, {"stddev", stats.target_delta.stddev}};
    return j;
}

ChannelStats channel_stats_from(const json& j, const std::string& path) {
    return {field<double>(j, "mean", path), field<double>(j, "stddev", path)};
}

NormStats stats_from_json(const json& j, const std::string& path) {
    NormStats stats;
    const auto channels = field<json>(j, "channels", path);
    for (const auto& [symbol, value] : channels.items()) {
        Channel channel;
        try {
            channel = channel_from_symbol(symbol);
        } catch (const Error&) {
            throw ConfigError(path + ".channels." + symbol + ": unknown channel");
        }
        stats.channels[channel] = channel_stats_from(value, path + ".channels." + symbol);
    }
    stats.target_delta = channel_stats_from(field<json>(j, "target_delta", path), path + ".target_delta");
    return stats;
}

json window_to_json(const WindowSpec& w) {
    json past = json::object();
    for (const auto& [channel, n] : w.covariate_past) past[std::string(1, channel_symbol(channel))] = n;
    return {{"target_past", w.target_past},   {"covariate_past", past},
            {"hour_blocks", w.hour_blocks},   {"horizon", w.horizon},
            {"stride", w.stride},             {"normalize_target_inputs", w.normalize_target_inputs}};
}

WindowSpec window_from_json(const json& j, const std::string& path) {
    WindowSpec w;
    w.target_past = field<std::size_t>(j, "target_past", path);
    w.hour_blocks = field_or<std::size_t>(j, "hour_blocks", path, 0);
    w.horizon = field<std::size_t>(j, "horizon", path);
    w.stride = field_or<std::size_t>(j, "stride", path, 1);
    w.normalize_target_inputs = field_or<bool>(j, "normalize_target_inputs", path, false);
    const auto past = field_or<json>(j, "covariate_past", path, json::object());
    for (const auto& [symbol, value] : past.items()) {
        const std::string where = path + ".covariate_past." + symbol;
        try {
            w.covariate_past[channel_from_symbol(symbol)] = value.get<std::size_t>();
        } catch (const Error&) {
            throw ConfigError(where + ": unknown channel");
        } catch (const json::exception&) {
            throw ConfigError(where + ": wrong type");
        }
    }
    try {
        w.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return w;
}

json mlp_config_to_json(const MlpConfig& c) {
    return {{"inputs", c.inputs},
            {"hidden", format_hidden_layout(c.hidden)},
            {"outputs", c.outputs},
            {"learning_rate", c.learning_rate},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"epochs", c.epochs},
            {"patience", c.patience},
            {"seed", c.seed}};
}

MlpConfig mlp_config_from_json(const json& j, const std::string& path) {
    MlpConfig c;
    c.inputs = field<std::size_t>(j, "inputs", path);
    try {
        c.hidden = parse_hidden_layout(field<std::string>(j, "hidden", path));
    } catch (const Error& e) {
        throw ConfigError(path + ".hidden: " + e.what());
    }
    c.outputs = field<std::size_t>(j, "outputs", path);
    c.learning_rate = field<double>(j, "learning_rate", path);
    c.momentum = field<double>(j, "momentum", path);
    c.weight_decay = field<double>(j, "weight_decay", path);
    c.epochs = field<std::size_t>(j, "epochs", path);
    c.patience = field<std::size_t>(j, "patience", path);
    c.seed = field<std::uint64_t>(j, "seed", path);
    return c;
}

json mlp_to_json(const MlpModel& m) {
    json layers = json::array();
    for (const auto& layer : m.net.layers())
        layers.push_back({{"inputs", layer.inputs},
                          {"outputs", layer.outputs},
                          {"activation", activation_name(layer.activation)},
                          {"weights", finite_array(layer.weights, "layer weights")},
                          {"biases", finite_array(layer.biases, "layer biases")}});
    return {{"format", kModelFormat},
            {"kind", "mlp"},
            {"id", m.id},
            {"config", mlp_config_to_json(m.net.config())},
            {"window", window_to_json(m.window)},
            {"norm_stats", stats_to_json(m.stats)},
            {"layers", layers}};
}

MlpModel mlp_from_json(const json& j) {
    MlpModel m;
    m.id = field_or<std::string>(j, "id", "", "mlp");
    m.window = window_from_json(field<json>(j, "window", ""), "window");
    m.stats = stats_from_json(field<json>(j, "norm_stats", ""), "norm_stats");
    auto config = mlp_config_from_json(field<json>(j, "config", ""), "config");
    std::vector<Layer> layers;
    const auto arr = field<json>(j, "layers", "");
    if (!arr.is_array()) throw ConfigError("layers: wrong type");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "layers[" + std::to_string(i) + "]";
        Layer layer;
        layer.inputs = field<std::size_t>(arr[i], "inputs", path);
        layer.outputs = field<std::size_t>(arr[i], "outputs", path);
        try {
            layer.activation = activation_from_name(field<std::string>(arr[i], "activation", path));
        } catch (const Error& e) {
            throw ConfigError(path + ".activation: " + e.what());
        }
        layer.weights = field<std::vector<double>>(arr[i], "weights", path);
        layer.biases = field<std::vector<double>>(arr[i], "biases", path);
        layers.push_back(std::move(layer));
    }
    if (config.inputs != m.window.input_dim() || config.outputs != m.window.horizon)
        throw ConfigError("config: network shape does not match the window");
    m.net = Mlp(std::move(config), std::move(layers));
    return m;
}

json ets_to_json(const EtsModel& m) {
    return {{"format", kModelFormat},
            {"kind", "ets"},
            {"name", m.name()},
            {"error", ets_error_name(m.error)},
            {"trend", ets_trend_name(m.trend)},
            {"params",
             {{"alpha", m.params.alpha},
              {"beta", m.params.beta},
              {"phi", m.params.phi},
              {"level0", m.params.level0},
              {"trend0", m.params.trend0}}},
            {"final_state", {{"level", m.final_state.level}, {"trend", m.final_state.trend}}},
            {"mse", m.mse},
            {"aic", m.aic},
            {"observations", m.observations}};
}

EtsModel ets_from_json(const json& j) {
    EtsModel m;
    try {
        m.error = ets_error_from_name(field<std::string>(j, "error", ""));
    } catch (const Error& e) {
        throw ConfigError(std::string("error: ") + e.what());
    }
    try {
        m.trend = ets_trend_from_name(field<std::string>(j, "trend", ""));
    } catch (const Error& e) {
        throw ConfigError(std::string("trend: ") + e.what());
    }
    const auto p = field<json>(j, "params", "");
    m.params.alpha = field<double>(p, "alpha", "params");
    m.params.beta = field<double>(p, "beta", "params");
    m.params.phi = field<double>(p, "phi", "params");
    m.params.level0 = field<double>(p, "level0", "params");
    m.params.trend0 = field<double>(p, "trend0", "params");
    const auto s = field<json>(j, "final_state", "");
    m.final_state.level = field<double>(s, "level", "final_state");
    m.final_state.trend = field<double>(s, "trend", "final_state");
    m.mse = field<double>(j, "mse", "");
    m.aic = field<double>(j, "aic", "");
    m.observations = field<std::size_t>(j, "observations", "");
    return m;
}

json arima_to_json(const ArimaModel& m) {
    return {{"format", kModelFormat},
            {"kind", "arima"},
            {"name", m.name()},
            {"exog", hour_regressors_name(m.exog)},
            {"constant", m.constant},
            {"ar", {m.ar[0], m.ar[1]}},
            {"beta", finite_array(m.beta, "ARIMA coefficients")},
            {"dropped", m.dropped},
            {"residual_variance", m.residual_variance},
            {"aic", m.aic},
            {"observations", m.observations},
            {"stationary", m.stationary}};
}

ArimaModel arima_from_json(const json& j) {
    ArimaModel m;
    try {
        m.exog = hour_regressors_from_name(field<std::string>(j, "exog", ""));
    } catch (const Error& e) {
        throw ConfigError(std::string("exog: ") + e.what());
    }
    m.constant = field<double>(j, "constant", "");
    const auto ar = field<std::vector<double>>(j, "ar", "");
    if (ar.size() != 2) throw ConfigError("ar: expected two coefficients");
    m.ar = {ar[0], ar[1]};
    m.beta = field<std::vector<double>>(j, "beta", "");
    if (m.beta.size() != hour_regressors(m.exog, 0).size()) throw ConfigError("beta: wrong length for exog");
    m.dropped = field_or<std::vector<std::size_t>>(j, "dropped", "", {});
    m.residual_variance = field<double>(j, "residual_variance", "");
    m.aic = field<double>(j, "aic", "");
    m.observations = field<std::size_t>(j, "observations", "");
    m.stationary = field_or<bool>(j, "stationary", "", true);
    return m;
}

std::string member_file(const std::filesystem::path& ensemble_path, const std::string& id) {
    return ensemble_path.stem().string() + "." + id + ".json";
}

}  // namespace

std::string window_to_text(const WindowSpec& window) { return window_to_json(window).dump(); }

void save_model(const std::filesystem::path& path, const AnyModel& model) {
    if (const auto* m = std::get_if<MlpModel>(&model)) return detail::write_json(path, mlp_to_json(*m));
    if (const auto* m = std::get_if<EtsModel>(&model)) return detail::write_json(path, ets_to_json(*m));
    if (const auto* m = std::get_if<ArimaModel>(&model)) return detail::write_json(path, arima_to_json(*m));
    const auto& e = std::get<EnsembleModel>(model);
    if (e.members.size() != e.spec.members.size()) throw DataError("ensemble members do not match its spec");
    json members = json::array();
    for (std::size_t i = 0; i < e.members.size(); ++i) {
        const auto& spec = e.spec.members[i];
        const auto file = member_file(path, spec.id);
        detail::write_json(path.parent_path() / file, mlp_to_json(e.members[i]));
        members.push_back({{"id", spec.id},
                           {"past_size", spec.past_size},
                           {"weight", spec.weight},
                           {"validation_mae", spec.validation_mae},
                           {"model", file}});
    }
    detail::write_json(path, {{"format", kModelFormat},
                              {"kind", "ensemble"},
                              {"strategy", strategy_name(e.spec.strategy)},
                              {"members", members}});
}

AnyModel load_model(const std::filesystem::path& path) {
    const auto j = detail::read_json(path);
    try {
        const auto format = field<std::string>(j, "format", "");
        if (format != kModelFormat) throw ConfigError("format: expected " + std::string(kModelFormat));
        const auto kind = field<std::string>(j, "kind", "");
        if (kind == "mlp") return mlp_from_json(j);
        if (kind == "ets") return ets_from_json(j);
        if (kind == "arima") return arima_from_json(j);
        if (kind != "ensemble") throw ConfigError("kind: unknown model kind '" + kind + "'");

        EnsembleModel e;
        try {
            e.spec.strategy = strategy_from_name(field<std::string>(j, "strategy", ""));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& err) {
            throw ConfigError(std::string("strategy: ") + err.what());
        }
        const auto members = field<json>(j, "members", "");
        if (!members.is_array() || members.empty()) throw ConfigError("members: expected a nonempty array");
        for (std::size_t i = 0; i < members.size(); ++i) {
            const std::string where = "members[" + std::to_string(i) + "]";
            EnsembleMember member;
            member.id = field<std::string>(members[i], "id", where);
            member.past_size = field<std::size_t>(members[i], "past_size", where);
            member.weight = field<double>(members[i], "weight", where);
            member.validation_mae = field<double>(members[i], "validation_mae", where);
            const auto ref = path.parent_path() / field<std::string>(members[i], "model", where);
            auto loaded = load_model(ref);
            if (!std::holds_alternative<MlpModel>(loaded)) throw ConfigError(where + ".model: not an MLP model");
            e.spec.members.push_back(member);
            e.members.push_back(std::get<MlpModel>(std::move(loaded)));
        }
        return e;
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace thermocast
