#include "thermocast/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermocast/error.hpp"
#include "thermocast/optimize.hpp"

namespace thermocast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPhiLow = 0.8;

bool has_trend(EtsTrend trend) { return trend != EtsTrend::None; }

std::size_t smoothing_count(EtsTrend trend) {
    switch (trend) {
        case EtsTrend::None: return 1;
        case EtsTrend::Additive: return 2;
        case EtsTrend::Damped: return 3;
    }
    return 1;
}

// Free parameter vector: alpha, [beta], [phi], level0, [trend0].
EtsParams decode(EtsTrend trend, std::span<const double> x) {
    EtsParams p;
    std::size_t k = 0;
    p.alpha = x[k++];
    p.beta = has_trend(trend) ? x[k++] : 0.0;
    p.phi = trend == EtsTrend::Damped ? x[k++] : 1.0;
    p.level0 = x[k++];
    p.trend0 = has_trend(trend) ? x[k++] : 0.0;
    return p;
}

std::vector<double> encode(EtsTrend trend, const EtsParams& p) {
    std::vector<double> x{p.alpha};
    if (has_trend(trend)) x.push_back(p.beta);
    if (trend == EtsTrend::Damped) x.push_back(p.phi);
    x.push_back(p.level0);
    if (has_trend(trend)) x.push_back(p.trend0);
    return x;
}

bool inside_box(EtsTrend trend, const EtsParams& p) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) return false;
    if (has_trend(trend) && !(p.beta > 0.0 && p.beta < p.alpha)) return false;
    if (trend == EtsTrend::Damped && !(p.phi > kPhiLow && p.phi < 1.0)) return false;
    return std::isfinite(p.level0) && std::isfinite(p.trend0);
}

EtsParams clamp_into_box(EtsTrend trend, EtsParams p) {
    constexpr double margin = 1e-4;
    p.alpha = std::clamp(p.alpha, margin, 1.0 - margin);
    if (has_trend(trend)) p.beta = std::clamp(p.beta, margin * p.alpha, p.alpha * (1.0 - margin));
    if (trend == EtsTrend::Damped) p.phi = std::clamp(p.phi, kPhiLow + margin, 1.0 - margin);
    return p;
}

double stddev(std::span<const double> values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

MinimizeResult minimize_mse(std::span<const double> values, EtsError error, EtsTrend trend, const EtsParams& start) {
    const double n = static_cast<double>(values.size());
    auto objective = [&](std::span<const double> x) {
        const auto p = decode(trend, x);
        if (!inside_box(trend, p)) return kInf;
        const auto fit = ets_filter(error, trend, p, values);
        return std::isfinite(fit.sse) ? fit.sse / n : kInf;
    };
    std::vector<double> diffs(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) diffs[i - 1] = values[i] - values[i - 1];
    const double level_step = std::max(1e-3, 0.1 * stddev(values));
    const double trend_step = std::max(1e-5, 0.1 * stddev(diffs));
    std::vector<double> steps{0.05};
    if (has_trend(trend)) steps.push_back(0.02);
    if (trend == EtsTrend::Damped) steps.push_back(0.02);
    steps.push_back(level_step);
    if (has_trend(trend)) steps.push_back(trend_step);

    auto result = nelder_mead(objective, encode(trend, start), steps);
    // Restarting from the optimum guards against simplex collapse.
    result = nelder_mead(objective, result.point, steps);
    return result;
}

}  // namespace

std::string_view ets_error_name(EtsError error) { return error == EtsError::Additive ? "A" : "M"; }

std::string_view ets_trend_name(EtsTrend trend) {
    switch (trend) {
        case EtsTrend::None: return "N";
        case EtsTrend::Additive: return "A";
        case EtsTrend::Damped: return "Ad";
    }
    return "?";
}

EtsError ets_error_from_name(std::string_view name) {
    if (name == "A") return EtsError::Additive;
    if (name == "M") return EtsError::Multiplicative;
    throw ConfigError("unknown ETS error type '" + std::string(name) + "'");
}

EtsTrend ets_trend_from_name(std::string_view name) {
    if (name == "N") return EtsTrend::None;
    if (name == "A") return EtsTrend::Additive;
    if (name == "Ad") return EtsTrend::Damped;
    throw ConfigError("unknown ETS trend type '" + std::string(name) + "'");
}

std::string EtsModel::name() const {
    return std::string(ets_error_name(error)) + std::string(ets_trend_name(trend)) + "N";
}

std::size_t EtsModel::parameter_count() const { return smoothing_count(trend) + (has_trend(trend) ? 2 : 1); }

EtsFilterResult ets_filter(EtsError error, EtsTrend trend, const EtsParams& params, std::span<const double> values) {
    EtsFilterResult out;
    out.one_step.resize(values.size());
    out.states.resize(values.size());
    const double phi = trend == EtsTrend::Damped ? params.phi : 1.0;
    const double beta = has_trend(trend) ? params.beta : 0.0;
    double level = params.level0;
    double slope = has_trend(trend) ? params.trend0 : 0.0;
    for (std::size_t t = 0; t < values.size(); ++t) {
        const double base = level + phi * slope;
        const double e = values[t] - base;
        out.one_step[t] = base;
        out.sse += e * e;
        if (error == EtsError::Additive) {
            level = base + params.alpha * e;
            slope = phi * slope + beta * e;
        } else {
            if (!(base > 0.0)) {
                out.sse = kInf;
                out.relative_sse = kInf;
                return out;
            }
            const double eps = e / base;
            out.relative_sse += eps * eps;
            out.log_abs_forecast += std::log(base);
            level = base * (1.0 + params.alpha * eps);
            slope = phi * slope + beta * base * eps;
        }
        out.states[t] = {level, slope};
    }
    return out;
}

EtsModel fit_ets(std::span<const double> values, EtsError error, EtsTrend trend) {
    if (values.size() < 10) throw DataError("ETS fitting needs at least 10 observations");
    if (error == EtsError::Multiplicative &&
        std::any_of(values.begin(), values.end(), [](double v) { return !(v > 0.0); }))
        throw DataError("multiplicative ETS needs strictly positive data");

    EtsParams start;
    start.alpha = 0.3;
    start.beta = 0.1;
    start.phi = trend == EtsTrend::Damped ? 0.95 : 1.0;
    start.level0 = values.front();
    start.trend0 = (values.back() - values.front()) / static_cast<double>(values.size() - 1);
    if (!has_trend(trend)) start.trend0 = 0.0;

    auto result = minimize_mse(values, error, trend, start);
    auto params = decode(trend, result.point);
    if (!inside_box(trend, params)) {
        result = minimize_mse(values, error, trend, clamp_into_box(trend, params));
        params = decode(trend, result.point);
        if (!inside_box(trend, params)) throw DataError("ETS optimizer left the admissible parameter box");
    }

    EtsModel model;
    model.error = error;
    model.trend = trend;
    model.params = params;
    model.observations = values.size();
    const auto fit = ets_filter(error, trend, params, values);
    if (!std::isfinite(fit.sse)) throw DataError("ETS fit produced a non-finite error");
    model.final_state = fit.states.back();
    const double n = static_cast<double>(values.size());
    model.mse = fit.sse / n;
    const double k = static_cast<double>(model.parameter_count());
    if (error == EtsError::Additive)
        model.aic = n * std::log(fit.sse / n) + 2.0 * k;
    else
        model.aic = n * std::log(fit.relative_sse / n) + 2.0 * fit.log_abs_forecast + 2.0 * k;
    return model;
}

std::vector<EtsModel> fit_ets_family(std::span<const double> values) {
    std::vector<EtsModel> models;
    for (auto error : {EtsError::Additive, EtsError::Multiplicative})
        for (auto trend : {EtsTrend::None, EtsTrend::Additive, EtsTrend::Damped})
            models.push_back(fit_ets(values, error, trend));
    return models;
}

EtsModel select_by_aic(std::span<const EtsModel> candidates) {
    if (candidates.empty()) throw DataError("no ETS candidates to select from");
    const auto* best = &candidates.front();
    for (const auto& m : candidates)
        if (m.aic < best->aic || (m.aic == best->aic && m.parameter_count() < best->parameter_count())) best = &m;
    return *best;
}

std::vector<double> forecast_ets(const EtsModel& model, std::size_t horizon) {
    return forecast_ets(model, model.final_state, horizon);
}

std::vector<double> forecast_ets(const EtsModel& model, const EtsState& state, std::size_t horizon) {
    std::vector<double> out(horizon);
    const double phi = model.trend == EtsTrend::Damped ? model.params.phi : 1.0;
    const double slope = has_trend(model.trend) ? state.trend : 0.0;
    double damp_sum = 0.0;
    double power = 1.0;
    for (std::size_t h = 0; h < horizon; ++h) {
        power *= phi;
        damp_sum += power;
        out[h] = state.level + damp_sum * slope;
    }
    return out;
}

std::string_view hour_regressors_name(HourRegressors kind) {
    switch (kind) {
        case HourRegressors::None: return "none";
        case HourRegressors::Factor: return "factor";
        case HourRegressors::Quadratic: return "quadratic";
    }
    return "?";
}

HourRegressors hour_regressors_from_name(std::string_view name) {
    if (name == "none") return HourRegressors::None;
    if (name == "factor") return HourRegressors::Factor;
    if (name == "quadratic") return HourRegressors::Quadratic;
    throw ConfigError("unknown hour regressor kind '" + std::string(name) + "'");
}

std::vector<double> hour_regressors(HourRegressors kind, int hour) {
    if (hour < 0 || hour > 23) throw DataError("hour out of range: " + std::to_string(hour));
    switch (kind) {
        case HourRegressors::None: return {};
        case HourRegressors::Factor: {
            std::vector<double> row(23, 0.0);
            if (hour > 0) row[static_cast<std::size_t>(hour - 1)] = 1.0;
            return row;
        }
        case HourRegressors::Quadratic: {
            const double h = hour;
            return {h, h * h};
        }
    }
    return {};
}

std::string ArimaModel::name() const {
    switch (exog) {
        case HourRegressors::None: return "ARIMA";
        case HourRegressors::Factor: return "ARIMAF";
        case HourRegressors::Quadratic: return "ARIMAQ";
    }
    return "ARIMA";
}

bool ar2_stationary(double phi1, double phi2) {
    return phi1 + phi2 < 1.0 && phi2 - phi1 < 1.0 && std::fabs(phi2) < 1.0;
}

ArimaModel fit_arima(std::span<const double> values, std::span<const int> hours, HourRegressors exog) {
    if (values.size() < 30) throw DataError("ARIMA fitting needs at least 30 observations");
    if (exog != HourRegressors::None && hours.size() != values.size())
        throw DataError("hour covariate is not aligned with the series");

    const std::size_t n = values.size();
    const std::size_t rows = n - 3;
    const std::size_t width = hour_regressors(exog, 0).size();

    // Exogenous columns that never vary away from zero cannot be estimated.
    std::vector<std::vector<double>> exog_rows;
    std::vector<std::size_t> active(width, 0);
    for (std::size_t t = 3; t < n; ++t) {
        exog_rows.push_back(hour_regressors(exog, exog == HourRegressors::None ? 0 : hours[t]));
        for (std::size_t j = 0; j < width; ++j)
            if (exog_rows.back()[j] != 0.0) ++active[j];
    }
    ArimaModel model;
    model.exog = exog;
    model.beta.assign(width, 0.0);
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < width; ++j) {
        if (active[j] == 0)
            model.dropped.push_back(j);
        else
            kept.push_back(j);
    }

    Eigen::MatrixXd design(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(3 + kept.size()));
    Eigen::VectorXd response(static_cast<Eigen::Index>(rows));
    for (std::size_t t = 3; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - 3);
        response(r) = values[t] - values[t - 1];
        design(r, 0) = 1.0;
        design(r, 1) = values[t - 1] - values[t - 2];
        design(r, 2) = values[t - 2] - values[t - 3];
        for (std::size_t c = 0; c < kept.size(); ++c)
            design(r, static_cast<Eigen::Index>(3 + c)) = exog_rows[t - 3][kept[c]];
    }
    // Minimum-norm least squares keeps rank-deficient designs (e.g. a constant
    // series) well defined.
    const Eigen::VectorXd coef = design.completeOrthogonalDecomposition().solve(response);
    model.constant = coef(0);
    model.ar = {coef(1), coef(2)};
    for (std::size_t c = 0; c < kept.size(); ++c) model.beta[kept[c]] = coef(static_cast<Eigen::Index>(3 + c));

    const Eigen::VectorXd residual = response - design * coef;
    model.observations = rows;
    model.residual_variance = residual.squaredNorm() / static_cast<double>(rows);
    const double k = static_cast<double>(3 + kept.size());
    model.aic = static_cast<double>(rows) * std::log(model.residual_variance) + 2.0 * k;
    model.stationary = ar2_stationary(model.ar[0], model.ar[1]);
    return model;
}

std::vector<double> forecast_arima(const ArimaModel& model, std::span<const double> history,
                                   std::span<const int> future_hours, std::size_t horizon) {
    if (history.size() < 3) throw DataError("ARIMA forecasting needs the last three observations");
    if (model.exog != HourRegressors::None && future_hours.size() < horizon)
        throw DataError("missing future hour covariate for an ARIMA model with regressors");
    const std::size_t n = history.size();
    double last = history[n - 1];
    double d1 = history[n - 1] - history[n - 2];
    double d2 = history[n - 2] - history[n - 3];
    std::vector<double> out(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        double delta = model.constant + model.ar[0] * d1 + model.ar[1] * d2;
        if (model.exog != HourRegressors::None) {
            const auto x = hour_regressors(model.exog, future_hours[h]);
            for (std::size_t j = 0; j < x.size(); ++j) delta += model.beta[j] * x[j];
        }
        last += delta;
        out[h] = last;
        d2 = d1;
        d1 = delta;
    }
    return out;
}

}  // namespace thermocast
