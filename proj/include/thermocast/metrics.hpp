#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thermocast {

enum class LossKind { Mae, Rmse, Smape };

std::string_view loss_name(LossKind kind);

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758;

double mae(std::span<const double> pred, std::span<const double> target);
double rmse(std::span<const double> pred, std::span<const double> target);
/// Percent. Throws DataError if |pred| + |target| is zero at any step.
double smape(std::span<const double> pred, std::span<const double> target);

struct WindowError {
    std::size_t origin = 0;
    double mae = 0.0;
    double rmse = 0.0;
    double smape = 0.0;

    double get(LossKind kind) const;
};

/// Row-major (windows x horizon) forecasts with their origins.
struct ForecastMatrix {
    std::size_t horizon = 0;
    std::vector<std::size_t> origins;
    std::vector<double> values;

    std::size_t rows() const { return origins.size(); }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * horizon, horizon}; }
};

struct AggregateError {
    LossKind kind = LossKind::Mae;
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    /// n == 1: the interval collapses onto the mean.
    bool degenerate = false;
};

/// Mean of `values` with mean +/- 2.5758 * s / sqrt(n), s the sample deviation.
AggregateError mean_with_ci(std::span<const double> values, LossKind kind);

AggregateError aggregate(std::span<const WindowError> errors, LossKind kind);

/// Per-horizon curve: for MAE and SMAPE the mean of the step-z inner term over
/// windows; for RMSE the root of the mean squared step-z error, with the
/// interval bounds mapped through the root.
std::vector<AggregateError> aggregate_by_horizon(const ForecastMatrix& forecasts, std::span<const double> actuals,
                                                 LossKind kind);

struct ModelReport {
    std::string model;
    AggregateError smape;
    AggregateError mae;
    AggregateError rmse;
    std::vector<AggregateError> smape_by_horizon;
    std::vector<AggregateError> mae_by_horizon;
};

/// Scores forecasts against row-aligned absolute actuals (windows x horizon).
ModelReport evaluate(std::string model, const ForecastMatrix& forecasts, std::span<const double> actuals);

/// model,loss,mean,lower,upper,n - one row per (model, loss).
void write_metrics_csv(const std::filesystem::path& path, std::span<const ModelReport> reports);
/// One row per model with SMAPE, MAE and RMSE columns and their intervals.
void write_comparison_csv(const std::filesystem::path& path, std::span<const ModelReport> reports);
/// model,horizon_min,loss,mean,lower,upper.
void write_horizon_csv(const std::filesystem::path& path, std::span<const ModelReport> reports,
                       long period_minutes = 15);

}  // namespace thermocast
