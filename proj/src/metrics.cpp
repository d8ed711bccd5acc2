#include "thermocast/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "csv_util.hpp"
#include "thermocast/error.hpp"
#include "thermocast/kernels.hpp"

namespace thermocast {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) throw DataError("prediction and target lengths differ");
    if (pred.empty()) throw DataError("empty forecast window");
}

std::string fmt(double v) { return detail::format_double(v); }

}  // namespace

std::string_view loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::Mae: return "MAE";
        case LossKind::Rmse: return "RMSE";
        case LossKind::Smape: return "SMAPE";
    }
    return "?";
}

double mae(std::span<const double> pred, std::span<const double> target) {
    check_lengths(pred, target);
    double sum = 0.0;
    for (std::size_t z = 0; z < pred.size(); ++z) sum += std::fabs(pred[z] - target[z]);
    return sum / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> target) {
    check_lengths(pred, target);
    double sum = 0.0;
    for (std::size_t z = 0; z < pred.size(); ++z) sum += (pred[z] - target[z]) * (pred[z] - target[z]);
    return std::sqrt(sum / static_cast<double>(pred.size()));
}

double smape(std::span<const double> pred, std::span<const double> target) {
    check_lengths(pred, target);
    double sum = 0.0;
    for (std::size_t z = 0; z < pred.size(); ++z) {
        const double denom = (std::fabs(pred[z]) + std::fabs(target[z])) / 2.0;
        if (denom == 0.0) throw DataError("SMAPE undefined: prediction and target both zero");
        sum += std::fabs(pred[z] - target[z]) / denom;
    }
    return sum / static_cast<double>(pred.size()) * 100.0;
}

double WindowError::get(LossKind kind) const {
    switch (kind) {
        case LossKind::Mae: return mae;
        case LossKind::Rmse: return rmse;
        case LossKind::Smape: return smape;
    }
    return mae;
}

AggregateError mean_with_ci(std::span<const double> values, LossKind kind) {
    if (values.empty()) throw DataError("cannot aggregate an empty error list");
    AggregateError agg;
    agg.kind = kind;
    agg.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / static_cast<double>(values.size());
    if (values.size() == 1) {
        agg.lower = agg.upper = agg.mean;
        agg.degenerate = true;
        return agg;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
    const double s = std::sqrt(ss / static_cast<double>(values.size() - 1));
    const double half = kZ99 * s / std::sqrt(static_cast<double>(values.size()));
    agg.lower = agg.mean - half;
    agg.upper = agg.mean + half;
    return agg;
}

AggregateError aggregate(std::span<const WindowError> errors, LossKind kind) {
    std::vector<double> values(errors.size());
    std::transform(errors.begin(), errors.end(), values.begin(), [kind](const WindowError& e) { return e.get(kind); });
    return mean_with_ci(values, kind);
}

std::vector<AggregateError> aggregate_by_horizon(const ForecastMatrix& forecasts, std::span<const double> actuals,
                                                 LossKind kind) {
    if (actuals.size() != forecasts.values.size() || forecasts.rows() == 0)
        throw DataError("forecast and actual matrices differ in shape");
    const std::size_t z_count = forecasts.horizon;
    std::vector<AggregateError> curve;
    std::vector<double> terms(forecasts.rows());
    for (std::size_t z = 0; z < z_count; ++z) {
        for (std::size_t r = 0; r < forecasts.rows(); ++r) {
            const double p = forecasts.values[r * z_count + z];
            const double a = actuals[r * z_count + z];
            switch (kind) {
                case LossKind::Mae: terms[r] = std::fabs(p - a); break;
                case LossKind::Rmse: terms[r] = (p - a) * (p - a); break;
                case LossKind::Smape: {
                    const double denom = (std::fabs(p) + std::fabs(a)) / 2.0;
                    if (denom == 0.0) throw DataError("SMAPE undefined: prediction and target both zero");
                    terms[r] = std::fabs(p - a) / denom * 100.0;
                    break;
                }
            }
        }
        auto agg = mean_with_ci(terms, kind);
        if (kind == LossKind::Rmse) {
            agg.mean = std::sqrt(agg.mean);
            agg.lower = std::sqrt(std::max(agg.lower, 0.0));
            agg.upper = std::sqrt(agg.upper);
        }
        curve.push_back(agg);
    }
    return curve;
}

ModelReport evaluate(std::string model, const ForecastMatrix& forecasts, std::span<const double> actuals) {
    const auto errors = kernels::parallel::window_errors(forecasts, actuals);
    ModelReport report;
    report.model = std::move(model);
    report.smape = aggregate(errors, LossKind::Smape);
    report.mae = aggregate(errors, LossKind::Mae);
    report.rmse = aggregate(errors, LossKind::Rmse);
    report.smape_by_horizon = aggregate_by_horizon(forecasts, actuals, LossKind::Smape);
    report.mae_by_horizon = aggregate_by_horizon(forecasts, actuals, LossKind::Mae);
    return report;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const ModelReport> reports) {
    auto out = detail::open_output(path);
    out << "model,loss,mean,lower,upper,n\n";
    for (const auto& r : reports)
        for (const auto* agg : {&r.smape, &r.mae, &r.rmse})
            out << r.model << ',' << loss_name(agg->kind) << ',' << fmt(agg->mean) << ',' << fmt(agg->lower) << ','
                << fmt(agg->upper) << ',' << agg->count << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

void write_comparison_csv(const std::filesystem::path& path, std::span<const ModelReport> reports) {
    auto out = detail::open_output(path);
    out << "model,smape,smape_lower,smape_upper,mae,mae_lower,mae_upper,rmse,rmse_lower,rmse_upper,n\n";
    for (const auto& r : reports) {
        out << r.model;
        for (const auto* agg : {&r.smape, &r.mae, &r.rmse})
            out << ',' << fmt(agg->mean) << ',' << fmt(agg->lower) << ',' << fmt(agg->upper);
        out << ',' << r.mae.count << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_horizon_csv(const std::filesystem::path& path, std::span<const ModelReport> reports, long period_minutes) {
    auto out = detail::open_output(path);
    out << "model,horizon_min,loss,mean,lower,upper\n";
    for (const auto& r : reports) {
        for (const auto* curve : {&r.smape_by_horizon, &r.mae_by_horizon})
            for (std::size_t z = 0; z < curve->size(); ++z) {
                const auto& agg = (*curve)[z];
                out << r.model << ',' << static_cast<long>(z + 1) * period_minutes << ',' << loss_name(agg.kind) << ','
                    << fmt(agg.mean) << ',' << fmt(agg.lower) << ',' << fmt(agg.upper) << '\n';
            }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace thermocast
