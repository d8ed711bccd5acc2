#include "thermocast/mi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csv_util.hpp"
#include "thermocast/error.hpp"
#include "thermocast/kernels.hpp"

namespace thermocast {

namespace {

std::vector<double> hour_values(const SensorFrame& frame) {
    std::vector<double> hours(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) hours[i] = frame.hour(i);
    return hours;
}

std::vector<double> channel_values(const SensorFrame& frame, Channel channel) {
    return channel == Channel::Hour ? hour_values(frame) : frame.at(channel);
}

// (H(x)+H(y))/H(x,y): 2 for identical variables, 1 for independent ones.
double normalized_from(const HistogramPair& hist) {
    const double total = entropy(hist.x_marginal) + entropy(hist.y_marginal);
    if (!(total > 0.0)) throw DataError("normalized MI undefined: both entropies are zero");
    return std::clamp(total / entropy(hist.joint), 1.0, 2.0);
}

MiRow score(std::span<const double> target, std::span<const double> other, std::size_t bins) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    try {
        const auto hist = histogram_pair(target, other, bins);
        const double mi = mutual_information(hist);
        return {mi, entropy(hist.x_marginal) + entropy(hist.y_marginal) > 0.0 ? normalized_from(hist) : nan};
    } catch (const DataError&) {
        return {nan, nan};
    }
}

}  // namespace

std::vector<std::uint32_t> bin_values(std::span<const double> values, std::size_t bins, std::vector<double>* edges) {
    if (bins == 0) throw ConfigError("bin count must be positive");
    if (values.empty()) throw DataError("cannot bin an empty variable");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) throw DataError("degenerate variable: zero-width range");
    const double width = (hi - lo) / static_cast<double>(bins);
    if (edges) {
        edges->resize(bins + 1);
        for (std::size_t b = 0; b <= bins; ++b) (*edges)[b] = lo + width * static_cast<double>(b);
        edges->back() = hi;
    }
    std::vector<std::uint32_t> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto b = static_cast<std::size_t>((values[i] - lo) / width);
        out[i] = static_cast<std::uint32_t>(std::min(b, bins - 1));
    }
    return out;
}

HistogramPair histogram_pair(std::span<const double> x, std::span<const double> y, std::size_t bins) {
    if (x.size() != y.size()) throw DataError("MI inputs differ in length");
    if (x.size() < bins) throw DataError("MI needs at least as many samples as bins");
    HistogramPair hist;
    hist.bins = bins;
    const auto xb = bin_values(x, bins, &hist.x_edges);
    const auto yb = bin_values(y, bins, &hist.y_edges);
    hist.joint = kernels::parallel::joint_histogram(xb, yb, bins);
    hist.x_marginal.assign(bins, 0);
    hist.y_marginal.assign(bins, 0);
    for (std::size_t a = 0; a < bins; ++a)
        for (std::size_t b = 0; b < bins; ++b) {
            hist.x_marginal[a] += hist.joint[a * bins + b];
            hist.y_marginal[b] += hist.joint[a * bins + b];
        }
    hist.samples = x.size();
    return hist;
}

double entropy(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw DataError("entropy of an empty histogram");
    const double n = static_cast<double>(total);
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double mutual_information(const HistogramPair& hist) {
    const double mi = entropy(hist.x_marginal) + entropy(hist.y_marginal) - entropy(hist.joint);
    return std::max(mi, 0.0);
}

double mutual_information(std::span<const double> x, std::span<const double> y, std::size_t bins) {
    return mutual_information(histogram_pair(x, y, bins));
}

double normalized_mi(std::span<const double> x, std::span<const double> y, std::size_t bins) {
    return normalized_from(histogram_pair(x, y, bins));
}

SensorFrame day_filter(const SensorFrame& frame) {
    const auto& irradiance = frame.at(Channel::Irradiance);
    SensorFrame out;
    out.period = frame.period;
    out.start = frame.start;
    for (const auto& [channel, values] : frame.channels) out.channels[channel];
    // Filtered frames are no longer evenly spaced; keep the hour as its own
    // channel so it survives the filter.
    const bool keep_hour = !frame.has(Channel::Hour);
    if (keep_hour) out.channels[Channel::Hour];
    for (std::size_t i = 0; i < frame.size(); ++i) {
        if (!(irradiance[i] > 0.0)) continue;
        for (const auto& [channel, values] : frame.channels) out.channels[channel].push_back(values[i]);
        if (keep_hour) out.channels[Channel::Hour].push_back(frame.hour(i));
    }
    return out;
}

MiReport mi_report(const SensorFrame& frame, std::size_t bins) {
    MiReport report;
    report.bins = bins;
    auto fill = [bins](const SensorFrame& source, std::map<Channel, MiRow>& rows) {
        const auto target = source.at(Channel::Temperature);
        for (auto channel : all_channels()) {
            if (channel != Channel::Hour && !source.has(channel)) continue;
            const auto values = source.has(channel) ? source.at(channel) : channel_values(source, channel);
            rows[channel] = score(target, values, bins);
        }
    };
    fill(frame, report.all_hours);
    if (frame.has(Channel::Irradiance)) fill(day_filter(frame), report.day_only);
    return report;
}

void write_mi_csv(const std::filesystem::path& path, const MiReport& report) {
    static const std::vector<Channel> columns{Channel::Temperature, Channel::Hour, Channel::Irradiance,
                                              Channel::Humidity,    Channel::Rain, Channel::Co2};
    auto out = detail::open_output(path);
    out << "measure,variant";
    for (auto c : columns) out << ',' << channel_symbol(c);
    out << '\n';
    auto cell = [](const std::map<Channel, MiRow>& rows, Channel c, bool normalized) -> std::string {
        const auto it = rows.find(c);
        if (it == rows.end()) return "";
        const double v = normalized ? it->second.normalized : it->second.mi;
        return std::isnan(v) ? "nan" : detail::format_double(v);
    };
    for (bool normalized : {false, true})
        for (const auto* variant : {&report.all_hours, &report.day_only}) {
            out << (normalized ? "normalized_mi" : "mi") << ',' << (variant == &report.all_hours ? "all" : "day");
            for (auto c : columns) out << ',' << cell(*variant, c, normalized);
            out << '\n';
        }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace thermocast
