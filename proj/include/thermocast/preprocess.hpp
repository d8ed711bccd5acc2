#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "thermocast/ingest.hpp"

namespace thermocast {

/// out[i] = in[i + 1] - in[i]. Requires at least two values.
std::vector<double> difference(std::span<const double> values);

/// out[z] = anchor + deltas[0] + ... + deltas[z].
std::vector<double> invert_difference(std::span<const double> deltas, double anchor);

struct ChannelStats {
    double mean = 0.0;
    double stddev = 1.0;  // population (divide-by-n)
};

/// Normalization statistics, computed from the training partition only.
struct NormStats {
    std::map<Channel, ChannelStats> channels;
    /// Stats of the differenced target; used when target inputs are z-scored.
    ChannelStats target_delta;

    const ChannelStats& at(Channel channel) const;
};

ChannelStats channel_stats(std::span<const double> values);

/// Stats of every sampled channel of `training` plus the differenced target.
NormStats compute_norm_stats(const SensorFrame& training);

/// (in[i] - mean) / stddev. Throws DataError on a zero deviation.
std::vector<double> znormalize(std::span<const double> values, const ChannelStats& stats);

std::array<double, 24> encode_hour(int hour);

/// Layout of one supervised window. Inputs are, in order: the differenced
/// target window (oldest first), each covariate's z-scored window in W, H, Q,
/// R order, then `hour_blocks` one-hot hour vectors (oldest first).
struct WindowSpec {
    std::size_t target_past = 5;
    std::map<Channel, std::size_t> covariate_past;  // subset of W, H, Q, R
    std::size_t hour_blocks = 0;                    // I(h); 0 when hour is not a covariate
    std::size_t horizon = 12;
    std::size_t stride = 1;
    bool normalize_target_inputs = false;

    std::size_t input_dim() const;
    std::size_t max_past() const;
    /// Covariate set as symbols, hour included when used, e.g. {'h','W'}.
    std::vector<Channel> covariates() const;
    void validate() const;
};

/// Window spec for a covariate set: every sampled covariate with `covariate_past`
/// lags, hour with one block if present.
WindowSpec make_window_spec(const std::vector<Channel>& covariates, std::size_t target_past,
                            std::size_t covariate_past = 5, std::size_t horizon = 12);

/// Supervised windows, rows aligned across `inputs`, `targets`, `actuals`.
struct PatternSet {
    std::size_t input_dim = 0;
    std::size_t horizon = 0;
    std::vector<double> inputs;   // rows x input_dim
    std::vector<double> targets;  // rows x horizon, differenced target
    std::vector<double> actuals;  // rows x horizon, absolute target
    std::vector<std::size_t> origins;
    std::vector<double> anchors;  // absolute target at the origin

    std::size_t rows() const { return origins.size(); }
    std::span<const double> input(std::size_t row) const { return {inputs.data() + row * input_dim, input_dim}; }
    std::span<const double> target(std::size_t row) const { return {targets.data() + row * horizon, horizon}; }
    std::span<const double> actual(std::size_t row) const { return {actuals.data() + row * horizon, horizon}; }
};

/// Origins t whose whole target window t+1..t+Z falls inside `targets`, and
/// whose input lags exist in the frame.
std::vector<std::size_t> admissible_origins(std::size_t frame_size, const WindowSpec& spec,
                                            std::optional<IndexRange> targets = std::nullopt);

/// Builds windows for every admissible origin. When `targets` is given, the
/// input lags may reach back before it into earlier frame data.
PatternSet build_patterns(const SensorFrame& frame, const WindowSpec& spec, const NormStats& stats,
                          std::optional<IndexRange> targets = std::nullopt);

/// Windows at the given origins, which must each have complete lags and targets.
PatternSet build_patterns_at(const SensorFrame& frame, const WindowSpec& spec, const NormStats& stats,
                             std::span<const std::size_t> origins);

/// One row per window: origin, inputs, targets.
void write_patterns_csv(const std::filesystem::path& path, const PatternSet& patterns);

}  // namespace thermocast
