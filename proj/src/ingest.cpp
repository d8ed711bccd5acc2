#include "thermocast/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include "csv_util.hpp"
#include "thermocast/error.hpp"

namespace thermocast {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

struct Run {
    std::size_t begin;
    std::size_t end;
};

std::vector<Run> missing_runs(const std::vector<double>& values) {
    std::vector<Run> runs;
    std::size_t i = 0;
    while (i < values.size()) {
        if (!std::isnan(values[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < values.size() && std::isnan(values[j])) ++j;
        runs.push_back({i, j});
        i = j;
    }
    return runs;
}

// Linear interpolation of interior runs no longer than max_gap. Longer runs
// and runs touching either end stay NaN.
std::vector<double> interpolate_short(std::vector<double> values, std::size_t max_gap) {
    for (const auto& run : missing_runs(values)) {
        if (run.begin == 0 || run.end == values.size()) continue;
        if (run.end - run.begin > max_gap) continue;
        const double left = values[run.begin - 1];
        const double right = values[run.end];
        const double span = static_cast<double>(run.end - run.begin + 1);
        for (std::size_t k = run.begin; k < run.end; ++k) {
            const double frac = static_cast<double>(k - run.begin + 1) / span;
            values[k] = left + (right - left) * frac;
        }
    }
    return values;
}

RawSeries sub_series(const RawSeries& series, std::size_t begin, std::size_t end) {
    RawSeries out;
    out.channel = series.channel;
    out.period = series.period;
    out.timestamps.assign(series.timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                          series.timestamps.begin() + static_cast<std::ptrdiff_t>(end));
    out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(begin),
                      series.values.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

void check_value_domain(Channel channel, double value, Timestamp ts) {
    if (channel == Channel::Rain && value != 0.0 && value != 1.0)
        throw DataError("rain value must be 0 or 1 at " + format_timestamp(ts));
    if (channel == Channel::Humidity && (value < 0.0 || value > 100.0))
        throw DataError("humidity outside [0, 100] at " + format_timestamp(ts));
}

}  // namespace

char channel_symbol(Channel channel) {
    switch (channel) {
        case Channel::Temperature: return 'd';
        case Channel::Hour: return 'h';
        case Channel::Irradiance: return 'W';
        case Channel::Humidity: return 'H';
        case Channel::Co2: return 'Q';
        case Channel::Rain: return 'R';
    }
    return '?';
}

Channel channel_from_symbol(std::string_view symbol) {
    if (symbol.size() == 1) {
        switch (symbol[0]) {
            case 'd': return Channel::Temperature;
            case 'h': return Channel::Hour;
            case 'W': return Channel::Irradiance;
            case 'H': return Channel::Humidity;
            case 'Q': return Channel::Co2;
            case 'R': return Channel::Rain;
            default: break;
        }
    }
    throw ConfigError("unknown channel symbol '" + std::string(symbol) + "'");
}

const std::vector<Channel>& all_channels() {
    static const std::vector<Channel> order{Channel::Temperature, Channel::Hour,  Channel::Irradiance,
                                            Channel::Humidity,    Channel::Co2, Channel::Rain};
    return order;
}

int utc_hour(Timestamp ts) { return static_cast<int>(floor_div(ts, 3600) - floor_div(ts, 86400) * 24); }

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    text = detail::trim(text);
    if (text.empty()) return std::nullopt;
    const bool all_digits = std::all_of(text.begin(), text.end(), [](char c) {
        return (c >= '0' && c <= '9') || c == '-';
    }) && text.find('-', 1) == std::string_view::npos;
    if (all_digits) {
        Timestamp value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
        return value;
    }
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    const std::string buf(text);
    const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (n < 6 || (sep != 'T' && sep != ' ')) return std::nullopt;
    if (n == 6) s = 0;
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto days = floor_div(ts, 86400);
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    const auto secs = ts - days * 86400;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(secs / 3600), static_cast<int>((secs / 60) % 60), static_cast<int>(secs % 60));
    return buf;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    if (!std::filesystem::exists(path)) throw IoError("missing file: " + path.string());
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV: " + path.string());
    const auto header = detail::split_fields(line);
    auto column_of = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("missing mapped column '" + name + "' in " + path.string());
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ts_col = column_of(schema.timestamp_column);
    std::vector<std::pair<Channel, std::size_t>> mapped;
    for (const auto& [channel, name] : schema.columns) {
        if (channel == Channel::Hour) throw ConfigError("hour is derived from timestamps, not a CSV column");
        mapped.emplace_back(channel, column_of(name));
    }

    std::vector<Timestamp> stamps;
    std::vector<std::vector<double>> cells(mapped.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        const auto ts = parse_timestamp(fields[ts_col]);
        if (!ts) throw DataError("unparseable timestamp at row " + std::to_string(row));
        if (!stamps.empty() && *ts <= stamps.back())
            throw DataError("non-monotonic timestamps at row " + std::to_string(row));
        stamps.push_back(*ts);
        for (std::size_t c = 0; c < mapped.size(); ++c)
            cells[c].push_back(detail::parse_double(fields[mapped[c].second]).value_or(kMissing));
    }
    if (stamps.empty()) throw DataError("no data rows in " + path.string());

    // Modal spacing defines the raw grid.
    std::int64_t period = 60;
    if (stamps.size() > 1) {
        std::map<std::int64_t, std::size_t> deltas;
        for (std::size_t i = 1; i < stamps.size(); ++i) ++deltas[stamps[i] - stamps[i - 1]];
        period = std::max_element(deltas.begin(), deltas.end(), [](const auto& a, const auto& b) {
                     return a.second < b.second;
                 })->first;
    }
    const auto grid_size = static_cast<std::size_t>((stamps.back() - stamps.front()) / period) + 1;
    std::vector<char> row_present(grid_size, 0);
    std::vector<std::size_t> slot(stamps.size());
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        const auto offset = stamps[i] - stamps.front();
        if (offset % period != 0)
            throw DataError("timestamp " + format_timestamp(stamps[i]) + " is off the " +
                            std::to_string(period) + " s grid");
        slot[i] = static_cast<std::size_t>(offset / period);
        row_present[slot[i]] = 1;
    }

    LoadResult result;
    for (std::size_t c = 0; c < mapped.size(); ++c) {
        RawSeries series;
        series.channel = mapped[c].first;
        series.period = period;
        series.timestamps.resize(grid_size);
        for (std::size_t k = 0; k < grid_size; ++k)
            series.timestamps[k] = stamps.front() + static_cast<Timestamp>(k) * period;
        series.values.assign(grid_size, kMissing);
        for (std::size_t i = 0; i < stamps.size(); ++i) {
            const double v = cells[c][i];
            if (!std::isnan(v)) check_value_domain(series.channel, v, stamps[i]);
            series.values[slot[i]] = v;
        }
        for (const auto& run : missing_runs(series.values)) {
            // Split each run where its cause changes.
            std::size_t k = run.begin;
            while (k < run.end) {
                const bool absent = !row_present[k];
                std::size_t j = k;
                while (j < run.end && static_cast<bool>(!row_present[j]) == absent) ++j;
                result.gaps.push_back({series.channel, k, j, absent ? "missing rows" : "unparseable value"});
                k = j;
            }
        }
        result.series.push_back(std::move(series));
    }
    return result;
}

void write_raw_csv(const std::filesystem::path& path, const std::vector<RawSeries>& series,
                   const CsvSchema& schema) {
    if (series.empty()) throw DataError("no series to write");
    auto out = detail::open_output(path);
    out << schema.timestamp_column;
    std::vector<const RawSeries*> ordered;
    for (const auto& s : series) {
        const auto it = schema.columns.find(s.channel);
        if (it == schema.columns.end())
            throw ConfigError(std::string("no column for channel ") + channel_symbol(s.channel));
        if (s.size() != series.front().size() || s.timestamps != series.front().timestamps)
            throw DataError("raw series do not share a time axis");
        out << ',' << it->second;
        ordered.push_back(&s);
    }
    out << '\n';
    const auto& stamps = series.front().timestamps;
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        out << format_timestamp(stamps[i]);
        for (const auto* s : ordered) {
            out << ',';
            if (!std::isnan(s->values[i])) out << detail::format_double(s->values[i]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_gap_ledger(const std::filesystem::path& path, const std::vector<GapRecord>& gaps) {
    auto out = detail::open_output(path);
    out << "channel,begin,end,length,cause\n";
    for (const auto& g : gaps)
        out << channel_symbol(g.channel) << ',' << g.begin << ',' << g.end << ',' << (g.end - g.begin) << ','
            << g.cause << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

std::size_t SensorFrame::size() const { return channels.empty() ? 0 : channels.begin()->second.size(); }

const std::vector<double>& SensorFrame::at(Channel channel) const {
    const auto it = channels.find(channel);
    if (it == channels.end()) throw DataError(std::string("frame has no channel ") + channel_symbol(channel));
    return it->second;
}

Resampled resample(const RawSeries& series, std::int64_t target_period) {
    if (series.period <= 0 || target_period <= 0 || target_period % series.period != 0)
        throw ConfigError("resampling period " + std::to_string(target_period) + " s is not a multiple of " +
                          std::to_string(series.period) + " s");
    Resampled out;
    if (series.timestamps.empty()) return out;
    const Timestamp first = series.timestamps.front();
    const Timestamp last = series.timestamps.back();
    // Blocks cover [q, q + target_period) with q on the wall-clock grid.
    const Timestamp q0 = ceil_div(first, target_period) * target_period;
    out.first_stamp = q0 + target_period;
    const auto per_block = static_cast<std::size_t>(target_period / series.period);
    for (Timestamp q = q0; q + target_period - series.period <= last; q += target_period) {
        const auto begin = static_cast<std::size_t>((q - first) / series.period);
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = begin; k < begin + per_block; ++k) {
            if (std::isnan(series.values[k])) continue;
            sum += series.values[k];
            ++count;
        }
        if (count == 0)
            throw DataError("empty resampling block ending " + format_timestamp(q + target_period) +
                            " (unfilled gap)");
        out.values.push_back(sum / static_cast<double>(count));
    }
    return out;
}

GapFillResult fill_gaps(const RawSeries& series, std::size_t max_gap) {
    GapFillResult result;
    RawSeries filled = series;
    filled.values = interpolate_short(series.values, max_gap);
    std::size_t seg_begin = 0;
    for (const auto& run : missing_runs(filled.values)) {
        const bool boundary = run.begin == 0 || run.end == filled.size();
        result.notes.push_back({series.channel, run.begin, run.end,
                                boundary ? "boundary gap truncated" : "gap longer than max_gap, split"});
        if (run.begin > seg_begin) result.segments.push_back(sub_series(filled, seg_begin, run.begin));
        seg_begin = run.end;
    }
    if (seg_begin < filled.size()) result.segments.push_back(sub_series(filled, seg_begin, filled.size()));
    return result;
}

IngestResult build_frames(const std::vector<RawSeries>& series, const IngestOptions& options) {
    if (series.empty()) throw DataError("no channels to ingest");
    const auto& axis = series.front().timestamps;
    for (const auto& s : series)
        if (s.timestamps != axis || s.period != series.front().period)
            throw DataError("channels do not share a time axis");

    IngestResult result;
    std::vector<std::vector<double>> filled;
    std::vector<char> bad(axis.size(), 0);
    for (const auto& s : series) {
        filled.push_back(interpolate_short(s.values, options.max_gap));
        for (const auto& run : missing_runs(filled.back())) {
            const bool boundary = run.begin == 0 || run.end == axis.size();
            result.notes.push_back({s.channel, run.begin, run.end,
                                    boundary ? "boundary gap truncated" : "gap longer than max_gap, split"});
            for (std::size_t k = run.begin; k < run.end; ++k) bad[k] = 1;
        }
    }

    std::size_t i = 0;
    while (i < axis.size()) {
        if (bad[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < axis.size() && !bad[j]) ++j;
        SensorFrame frame;
        frame.period = options.period;
        bool any = false;
        for (std::size_t c = 0; c < series.size(); ++c) {
            RawSeries piece = sub_series(series[c], i, j);
            std::copy(filled[c].begin() + static_cast<std::ptrdiff_t>(i),
                      filled[c].begin() + static_cast<std::ptrdiff_t>(j), piece.values.begin());
            auto blocks = resample(piece, options.period);
            if (blocks.values.empty()) break;
            frame.start = blocks.first_stamp;
            frame.channels[series[c].channel] = std::move(blocks.values);
            any = true;
        }
        if (any && frame.channels.size() == series.size()) result.frames.push_back(std::move(frame));
        i = j;
    }
    std::stable_sort(result.frames.begin(), result.frames.end(),
                     [](const SensorFrame& a, const SensorFrame& b) { return a.size() > b.size(); });
    return result;
}

void write_frame_csv(const std::filesystem::path& path, const SensorFrame& frame) {
    auto out = detail::open_output(path);
    out << "timestamp";
    for (const auto& [channel, values] : frame.channels) out << ',' << channel_symbol(channel);
    out << '\n';
    for (std::size_t i = 0; i < frame.size(); ++i) {
        out << format_timestamp(frame.timestamp(i));
        for (const auto& [channel, values] : frame.channels) out << ',' << detail::format_double(values[i]);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

SensorFrame read_frame_csv(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty frame CSV: " + path.string());
    const auto header = detail::split_fields(line);
    if (header.empty() || header[0] != "timestamp") throw DataError("frame CSV must start with a timestamp column");
    std::vector<Channel> channels;
    for (std::size_t c = 1; c < header.size(); ++c) channels.push_back(channel_from_symbol(header[c]));
    SensorFrame frame;
    std::vector<Timestamp> stamps;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != header.size()) throw DataError("ragged frame CSV row");
        const auto ts = parse_timestamp(fields[0]);
        if (!ts) throw DataError("unparseable frame timestamp");
        stamps.push_back(*ts);
        for (std::size_t c = 0; c < channels.size(); ++c) {
            const auto v = detail::parse_double(fields[c + 1]);
            if (!v) throw DataError("frame CSV has a missing value");
            frame.channels[channels[c]].push_back(*v);
        }
    }
    if (stamps.empty()) throw DataError("frame CSV has no rows");
    frame.start = stamps.front();
    if (stamps.size() > 1) frame.period = stamps[1] - stamps[0];
    for (std::size_t i = 1; i < stamps.size(); ++i)
        if (stamps[i] - stamps[i - 1] != frame.period) throw DataError("frame CSV is not evenly spaced");
    return frame;
}

PartitionSpec default_partition(const SensorFrame& frame, std::size_t train_days, std::size_t validation_days,
                                std::size_t test_days) {
    if (frame.period <= 0 || 86400 % frame.period != 0)
        throw ConfigError("frame period must divide one day");
    const auto per_day = static_cast<std::size_t>(86400 / frame.period);
    PartitionSpec spec;
    spec.train = {0, train_days * per_day};
    spec.validation = {spec.train.end, spec.train.end + validation_days * per_day};
    spec.test = {spec.validation.end, spec.validation.end + test_days * per_day};
    validate_partition(spec, frame.size());
    return spec;
}

void validate_partition(const PartitionSpec& spec, std::size_t frame_size) {
    for (const auto* r : {&spec.train, &spec.validation, &spec.test})
        if (r->begin >= r->end) throw ConfigError("partition ranges must be nonempty");
    if (spec.train.end > spec.validation.begin || spec.validation.end > spec.test.begin)
        throw ConfigError("overlapping or misordered partition ranges");
    if (spec.test.end > frame_size)
        throw DataError("range exceeds frame: partition needs " + std::to_string(spec.test.end) +
                        " samples, frame has " + std::to_string(frame_size));
}

SensorFrame slice(const SensorFrame& frame, IndexRange range) {
    if (range.begin > range.end || range.end > frame.size()) throw DataError("range exceeds frame");
    SensorFrame out;
    out.period = frame.period;
    out.start = frame.timestamp(range.begin);
    for (const auto& [channel, values] : frame.channels)
        out.channels[channel].assign(values.begin() + static_cast<std::ptrdiff_t>(range.begin),
                                     values.begin() + static_cast<std::ptrdiff_t>(range.end));
    return out;
}

SplitFrames split(const SensorFrame& frame, const PartitionSpec& spec) {
    validate_partition(spec, frame.size());
    return {slice(frame, spec.train), slice(frame, spec.validation), slice(frame, spec.test)};
}

}  // namespace thermocast
