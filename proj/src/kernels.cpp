#include "thermocast/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "thermocast/error.hpp"

namespace thermocast::kernels {

namespace {

std::size_t input_width(const WindowSources& src) {
    std::size_t width = src.target_past + 24 * src.hour_blocks;
    for (auto past : src.covariate_past) width += past;
    return width;
}

void prepare(const WindowSources& src, std::span<const std::size_t> origins, PatternSet& out) {
    out.input_dim = input_width(src);
    out.horizon = src.horizon;
    out.origins.assign(origins.begin(), origins.end());
    out.inputs.assign(origins.size() * out.input_dim, 0.0);
    out.targets.assign(origins.size() * out.horizon, 0.0);
    out.actuals.assign(origins.size() * out.horizon, 0.0);
    out.anchors.assign(origins.size(), 0.0);
}

// Inputs hold lags t-I+1..t of each source, oldest first. Target deltas at
// position t live at delta[t - 1].
void fill_row(const WindowSources& src, std::size_t row, std::size_t t, PatternSet& out) {
    double* in = out.inputs.data() + row * out.input_dim;
    for (std::size_t k = 0; k < src.target_past; ++k) {
        const double delta = src.target_delta[t - src.target_past + k];
        *in++ = (delta - src.delta_mean) / src.delta_scale;
    }
    for (std::size_t c = 0; c < src.covariates.size(); ++c) {
        const auto past = src.covariate_past[c];
        for (std::size_t k = 0; k < past; ++k) *in++ = src.covariates[c][t + 1 - past + k];
    }
    for (std::size_t b = 0; b < src.hour_blocks; ++b) {
        const int hour = src.hours[t + 1 - src.hour_blocks + b];
        in[hour] = 1.0;
        in += 24;
    }
    double* target = out.targets.data() + row * out.horizon;
    double* actual = out.actuals.data() + row * out.horizon;
    for (std::size_t z = 0; z < src.horizon; ++z) {
        target[z] = src.target_delta[t + z];
        actual[z] = src.target[t + 1 + z];
    }
    out.anchors[row] = src.target[t];
}

void forward_row(const Mlp& net, const PatternSet& patterns, std::size_t row, Workspace& work, double* out) {
    forward_into(net, patterns.input(row), work);
    const auto& y = work.activations.back();
    std::copy(y.begin(), y.end(), out);
}

// Returns false when SMAPE is undefined for the window.
bool score_row(const ForecastMatrix& forecasts, std::span<const double> actuals, std::size_t row, WindowError& err) {
    const std::size_t z_count = forecasts.horizon;
    const double* pred = forecasts.values.data() + row * z_count;
    const double* truth = actuals.data() + row * z_count;
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    for (std::size_t z = 0; z < z_count; ++z) {
        const double e = pred[z] - truth[z];
        const double denom = (std::fabs(pred[z]) + std::fabs(truth[z])) / 2.0;
        if (denom == 0.0) return false;
        abs_sum += std::fabs(e);
        sq_sum += e * e;
        pct_sum += std::fabs(e) / denom;
    }
    const auto n = static_cast<double>(z_count);
    err.origin = forecasts.origins[row];
    err.mae = abs_sum / n;
    err.rmse = std::sqrt(sq_sum / n);
    err.smape = pct_sum / n * 100.0;
    return true;
}

void check_scoring_shapes(const ForecastMatrix& forecasts, std::span<const double> actuals) {
    if (forecasts.horizon == 0 || forecasts.values.size() != forecasts.rows() * forecasts.horizon ||
        actuals.size() != forecasts.values.size())
        throw DataError("forecast and actual matrices differ in shape");
}

void check_histogram_input(std::span<const std::uint32_t> xbins, std::span<const std::uint32_t> ybins,
                           std::size_t bins) {
    if (xbins.size() != ybins.size()) throw DataError("histogram inputs differ in length");
    for (std::size_t i = 0; i < xbins.size(); ++i)
        if (xbins[i] >= bins || ybins[i] >= bins) throw DataError("bin index out of range");
}

}  // namespace

namespace serial {

void assemble_windows(const WindowSources& src, std::span<const std::size_t> origins, PatternSet& out) {
    prepare(src, origins, out);
    for (std::size_t r = 0; r < origins.size(); ++r) fill_row(src, r, origins[r], out);
}

std::vector<double> forward_batch(const Mlp& net, const PatternSet& patterns) {
    std::vector<double> out(patterns.rows() * net.output_dim());
    Workspace work;
    for (std::size_t r = 0; r < patterns.rows(); ++r) forward_row(net, patterns, r, work, out.data() + r * net.output_dim());
    return out;
}

std::vector<WindowError> window_errors(const ForecastMatrix& forecasts, std::span<const double> actuals) {
    check_scoring_shapes(forecasts, actuals);
    std::vector<WindowError> errors(forecasts.rows());
    for (std::size_t r = 0; r < forecasts.rows(); ++r)
        if (!score_row(forecasts, actuals, r, errors[r]))
            throw DataError("SMAPE undefined: prediction and target both zero at origin " +
                            std::to_string(forecasts.origins[r]));
    return errors;
}

std::vector<std::uint64_t> joint_histogram(std::span<const std::uint32_t> xbins, std::span<const std::uint32_t> ybins,
                                           std::size_t bins) {
    check_histogram_input(xbins, ybins, bins);
    std::vector<std::uint64_t> counts(bins * bins, 0);
    for (std::size_t i = 0; i < xbins.size(); ++i) ++counts[xbins[i] * bins + ybins[i]];
    return counts;
}

}  // namespace serial

namespace parallel {

void assemble_windows(const WindowSources& src, std::span<const std::size_t> origins, PatternSet& out) {
    prepare(src, origins, out);
    const auto n = static_cast<std::int64_t>(origins.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) fill_row(src, static_cast<std::size_t>(r), origins[static_cast<std::size_t>(r)], out);
}

std::vector<double> forward_batch(const Mlp& net, const PatternSet& patterns) {
    std::vector<double> out(patterns.rows() * net.output_dim());
    const auto n = static_cast<std::int64_t>(patterns.rows());
#pragma omp parallel
    {
        Workspace work;
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < n; ++r) {
            const auto row = static_cast<std::size_t>(r);
            forward_row(net, patterns, row, work, out.data() + row * net.output_dim());
        }
    }
    return out;
}

std::vector<WindowError> window_errors(const ForecastMatrix& forecasts, std::span<const double> actuals) {
    check_scoring_shapes(forecasts, actuals);
    std::vector<WindowError> errors(forecasts.rows());
    std::vector<char> ok(forecasts.rows(), 1);
    const auto n = static_cast<std::int64_t>(forecasts.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) {
        const auto row = static_cast<std::size_t>(r);
        ok[row] = score_row(forecasts, actuals, row, errors[row]) ? 1 : 0;
    }
    const auto bad = std::find(ok.begin(), ok.end(), 0);
    if (bad != ok.end())
        throw DataError("SMAPE undefined: prediction and target both zero at origin " +
                        std::to_string(forecasts.origins[static_cast<std::size_t>(bad - ok.begin())]));
    return errors;
}

std::vector<std::uint64_t> joint_histogram(std::span<const std::uint32_t> xbins, std::span<const std::uint32_t> ybins,
                                           std::size_t bins) {
    check_histogram_input(xbins, ybins, bins);
    std::vector<std::uint64_t> counts(bins * bins, 0);
    const auto n = static_cast<std::int64_t>(xbins.size());
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(bins * bins, 0);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            ++local[xbins[k] * bins + ybins[k]];
        }
#pragma omp critical(thermocast_histogram)
        for (std::size_t c = 0; c < local.size(); ++c) counts[c] += local[c];
    }
    return counts;
}

}  // namespace parallel

}  // namespace thermocast::kernels
