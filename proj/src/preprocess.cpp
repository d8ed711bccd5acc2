#include "thermocast/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "csv_util.hpp"
#include "thermocast/error.hpp"
#include "thermocast/kernels.hpp"

namespace thermocast {

namespace {

constexpr Channel kSampledCovariates[] = {Channel::Irradiance, Channel::Humidity, Channel::Co2, Channel::Rain};

}  // namespace

std::vector<double> difference(std::span<const double> values) {
    if (values.size() < 2) throw DataError("differencing needs at least two values");
    std::vector<double> out(values.size() - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) out[i] = values[i + 1] - values[i];
    return out;
}

std::vector<double> invert_difference(std::span<const double> deltas, double anchor) {
    std::vector<double> out(deltas.size());
    double level = anchor;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        level += deltas[i];
        out[i] = level;
    }
    return out;
}

const ChannelStats& NormStats::at(Channel channel) const {
    const auto it = channels.find(channel);
    if (it == channels.end())
        throw DataError(std::string("no normalization stats for channel ") + channel_symbol(channel));
    return it->second;
}

ChannelStats channel_stats(std::span<const double> values) {
    if (values.empty()) throw DataError("cannot compute statistics of an empty channel");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

NormStats compute_norm_stats(const SensorFrame& training) {
    NormStats stats;
    for (const auto& [channel, values] : training.channels) stats.channels[channel] = channel_stats(values);
    if (training.has(Channel::Temperature) && training.size() >= 2) {
        const auto deltas = difference(training.at(Channel::Temperature));
        stats.target_delta = channel_stats(deltas);
    }
    return stats;
}

std::vector<double> znormalize(std::span<const double> values, const ChannelStats& stats) {
    if (!(stats.stddev > 0.0)) throw DataError("degenerate channel: zero standard deviation");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - stats.mean) / stats.stddev;
    return out;
}

std::array<double, 24> encode_hour(int hour) {
    if (hour < 0 || hour > 23) throw DataError("hour out of range: " + std::to_string(hour));
    std::array<double, 24> code{};
    code[static_cast<std::size_t>(hour)] = 1.0;
    return code;
}

std::size_t WindowSpec::input_dim() const {
    std::size_t dim = target_past + 24 * hour_blocks;
    for (const auto& [channel, past] : covariate_past) dim += past;
    return dim;
}

std::size_t WindowSpec::max_past() const {
    std::size_t longest = std::max(target_past, hour_blocks);
    for (const auto& [channel, past] : covariate_past) longest = std::max(longest, past);
    return longest;
}

std::vector<Channel> WindowSpec::covariates() const {
    std::vector<Channel> out;
    if (hour_blocks > 0) out.push_back(Channel::Hour);
    for (const auto& [channel, past] : covariate_past) out.push_back(channel);
    return out;
}

void WindowSpec::validate() const {
    if (horizon < 1) throw ConfigError("window.horizon must be at least 1");
    if (target_past < 1) throw ConfigError("window.target_past must be at least 1");
    if (stride < 1) throw ConfigError("window.stride must be at least 1");
    for (const auto& [channel, past] : covariate_past) {
        if (std::find(std::begin(kSampledCovariates), std::end(kSampledCovariates), channel) ==
            std::end(kSampledCovariates))
            throw ConfigError(std::string("channel ") + channel_symbol(channel) + " cannot be a sampled covariate");
        if (past < 1) throw ConfigError("covariate past sizes must be at least 1");
    }
}

WindowSpec make_window_spec(const std::vector<Channel>& covariates, std::size_t target_past,
                            std::size_t covariate_past, std::size_t horizon) {
    WindowSpec spec;
    spec.target_past = target_past;
    spec.horizon = horizon;
    for (auto channel : covariates) {
        if (channel == Channel::Temperature) continue;
        if (channel == Channel::Hour)
            spec.hour_blocks = 1;
        else
            spec.covariate_past[channel] = covariate_past;
    }
    spec.validate();
    return spec;
}

std::vector<std::size_t> admissible_origins(std::size_t frame_size, const WindowSpec& spec,
                                            std::optional<IndexRange> targets) {
    spec.validate();
    std::size_t first = spec.max_past();
    if (frame_size < 1 + spec.max_past() + spec.horizon)
        throw DataError("frame of " + std::to_string(frame_size) + " samples is shorter than 1 + max past + horizon");
    std::size_t last = frame_size - 1 - spec.horizon;  // inclusive
    if (targets) {
        if (targets->end > frame_size || targets->begin >= targets->end) throw DataError("target range exceeds frame");
        if (targets->begin > 0) first = std::max(first, targets->begin - 1);
        if (targets->end < spec.horizon + 1) throw DataError("target range shorter than the horizon");
        last = std::min(last, targets->end - 1 - spec.horizon);
    }
    std::vector<std::size_t> origins;
    for (std::size_t t = first; t <= last; t += spec.stride) origins.push_back(t);
    if (origins.empty()) throw DataError("no admissible forecast windows in range");
    return origins;
}

PatternSet build_patterns(const SensorFrame& frame, const WindowSpec& spec, const NormStats& stats,
                          std::optional<IndexRange> targets) {
    return build_patterns_at(frame, spec, stats, admissible_origins(frame.size(), spec, targets));
}

PatternSet build_patterns_at(const SensorFrame& frame, const WindowSpec& spec, const NormStats& stats,
                             std::span<const std::size_t> origins) {
    spec.validate();
    for (auto t : origins)
        if (t < spec.max_past() || t + spec.horizon >= frame.size())
            throw DataError("origin " + std::to_string(t) + " has no complete window in the frame");
    const auto& temperature = frame.at(Channel::Temperature);
    const auto deltas = difference(temperature);

    std::vector<std::vector<double>> normalized;
    kernels::WindowSources src;
    for (const auto& [channel, past] : spec.covariate_past) {
        normalized.push_back(znormalize(frame.at(channel), stats.at(channel)));
        src.covariate_past.push_back(past);
    }
    for (const auto& values : normalized) src.covariates.emplace_back(values);
    std::vector<int> hours(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) hours[i] = frame.hour(i);

    src.target = temperature;
    src.target_delta = deltas;
    src.hours = hours;
    src.target_past = spec.target_past;
    src.hour_blocks = spec.hour_blocks;
    src.horizon = spec.horizon;
    if (spec.normalize_target_inputs) {
        if (!(stats.target_delta.stddev > 0.0)) throw DataError("degenerate channel: differenced target is constant");
        src.delta_mean = stats.target_delta.mean;
        src.delta_scale = stats.target_delta.stddev;
    }

    PatternSet patterns;
    kernels::parallel::assemble_windows(src, origins, patterns);
    return patterns;
}

void write_patterns_csv(const std::filesystem::path& path, const PatternSet& patterns) {
    auto out = detail::open_output(path);
    out << "origin";
    for (std::size_t i = 0; i < patterns.input_dim; ++i) out << ",x" << i;
    for (std::size_t z = 0; z < patterns.horizon; ++z) out << ",y" << (z + 1);
    out << '\n';
    for (std::size_t r = 0; r < patterns.rows(); ++r) {
        out << patterns.origins[r];
        for (double v : patterns.input(r)) out << ',' << detail::format_double(v);
        for (double v : patterns.target(r)) out << ',' << detail::format_double(v);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace thermocast
