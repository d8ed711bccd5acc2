#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thermocast {

/// Sensor channels of the house. `Hour` is derived from timestamps and never
/// stored as a sampled series.
enum class Channel { Temperature, Hour, Irradiance, Humidity, Co2, Rain };

/// One-letter symbol used in configs and reports: d, h, W, H, Q, R.
char channel_symbol(Channel channel);
Channel channel_from_symbol(std::string_view symbol);
/// Canonical report order d, h, W, H, Q, R.
const std::vector<Channel>& all_channels();

using Timestamp = std::int64_t;  // UTC seconds since the epoch

/// Hour of day (0-23) of a UTC timestamp.
int utc_hour(Timestamp ts);
/// Parses ISO-8601 (`2011-03-01T00:15:00Z`, `2011-03-01 00:15:00`) or epoch seconds.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

/// Raw sensor log on a regular grid. Missing or unparseable samples are NaN.
struct RawSeries {
    Channel channel = Channel::Temperature;
    std::int64_t period = 60;  // seconds between consecutive samples
    std::vector<Timestamp> timestamps;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// One contiguous run of missing raw samples. `end` is exclusive.
struct GapRecord {
    Channel channel = Channel::Temperature;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string cause;
};

struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::map<Channel, std::string> columns;
};

struct LoadResult {
    std::vector<RawSeries> series;
    std::vector<GapRecord> gaps;
};

/// Reads a minute-level log. Timestamps must be strictly increasing; missing
/// rows and unparseable cells become NaN samples and are listed in `gaps`.
LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Writes raw series sharing one time axis in the format `load_csv` reads.
void write_raw_csv(const std::filesystem::path& path, const std::vector<RawSeries>& series,
                   const CsvSchema& schema);

void write_gap_ledger(const std::filesystem::path& path, const std::vector<GapRecord>& gaps);

/// Aligned multichannel series at a fixed sampling period. Each sample is
/// stamped with the end of the block it summarizes.
struct SensorFrame {
    std::int64_t period = 900;
    Timestamp start = 0;
    std::map<Channel, std::vector<double>> channels;

    std::size_t size() const;
    bool has(Channel channel) const { return channels.count(channel) != 0; }
    const std::vector<double>& at(Channel channel) const;
    Timestamp timestamp(std::size_t index) const { return start + static_cast<Timestamp>(index) * period; }
    int hour(std::size_t index) const { return utc_hour(timestamp(index)); }
};

/// Block means over wall-clock aligned blocks of `target_period` seconds.
/// Partial leading and trailing blocks are dropped. Returns the block means and
/// the timestamp (block end) of the first one.
struct Resampled {
    Timestamp first_stamp = 0;
    std::vector<double> values;
};
Resampled resample(const RawSeries& series, std::int64_t target_period);

struct GapFillResult {
    std::vector<RawSeries> segments;
    std::vector<GapRecord> notes;
};

/// Interpolates runs of at most `max_gap` missing samples; longer runs split
/// the series, gaps touching either end truncate it.
GapFillResult fill_gaps(const RawSeries& series, std::size_t max_gap);

struct IngestOptions {
    std::int64_t period = 900;
    std::size_t max_gap = 5;
};

struct IngestResult {
    std::vector<SensorFrame> frames;  // longest first
    std::vector<GapRecord> notes;
};

/// Gap handling and resampling of every channel on a common time axis. Long
/// gaps in any channel split all channels at the same point.
IngestResult build_frames(const std::vector<RawSeries>& series, const IngestOptions& options);

void write_frame_csv(const std::filesystem::path& path, const SensorFrame& frame);
SensorFrame read_frame_csv(const std::filesystem::path& path);

/// Half-open index interval into a frame.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const IndexRange&) const = default;
};

struct PartitionSpec {
    IndexRange train;
    IndexRange validation;
    IndexRange test;
};

/// Consecutive 21/7/7-day train/validation/test ranges for the frame's period.
PartitionSpec default_partition(const SensorFrame& frame, std::size_t train_days = 21,
                                std::size_t validation_days = 7, std::size_t test_days = 7);

void validate_partition(const PartitionSpec& spec, std::size_t frame_size);

SensorFrame slice(const SensorFrame& frame, IndexRange range);

struct SplitFrames {
    SensorFrame train;
    SensorFrame validation;
    SensorFrame test;
};
SplitFrames split(const SensorFrame& frame, const PartitionSpec& spec);

}  // namespace thermocast
