#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thermocast {

// ---------------------------------------------------------------------------
// Exponential smoothing, non-seasonal subset of the ETS taxonomy:
// error {A, M} x trend {N, A, Ad}.
// ---------------------------------------------------------------------------

enum class EtsError { Additive, Multiplicative };
enum class EtsTrend { None, Additive, Damped };

struct EtsParams {
    double alpha = 0.3;
    double beta = 0.1;  // unused without trend
    double phi = 1.0;   // 1 unless damped
    double level0 = 0.0;
    double trend0 = 0.0;
};

struct EtsState {
    double level = 0.0;
    double trend = 0.0;
};

struct EtsModel {
    EtsError error = EtsError::Additive;
    EtsTrend trend = EtsTrend::None;
    EtsParams params;
    EtsState final_state;  // after the last training observation
    double mse = 0.0;      // in-sample one-step
    double aic = 0.0;
    std::size_t observations = 0;

    std::string name() const;  // e.g. "AAdN"
    std::size_t parameter_count() const;
};

struct EtsFilterResult {
    std::vector<double> one_step;  // forecast of values[t] made at t-1
    std::vector<EtsState> states;  // state after observing values[t]
    double sse = 0.0;
    double relative_sse = 0.0;  // sum of squared relative errors
    double log_abs_forecast = 0.0;  // sum of ln|one_step|
};

/// Runs the state-space recursions with fixed parameters.
///   additive error:       l = l' + phi b' + alpha e,        b = phi b' + beta e
///   multiplicative error: l = (l' + phi b')(1 + alpha eps), b = phi b' + beta (l' + phi b') eps
/// with e = y - yhat, eps = e / yhat and yhat = l' + phi b'.
EtsFilterResult ets_filter(EtsError error, EtsTrend trend, const EtsParams& params, std::span<const double> values);

/// Least one-step MSE fit by Nelder-Mead from alpha=0.3, beta=0.1, phi=0.95,
/// level0 = first value, trend0 = mean first difference, inside the boxes
/// alpha in (0,1), beta in (0,alpha), phi in (0.8,1).
EtsModel fit_ets(std::span<const double> values, EtsError error, EtsTrend trend);

/// All six candidates on the same data.
std::vector<EtsModel> fit_ets_family(std::span<const double> values);

/// Minimal AIC; ties go to fewer parameters.
EtsModel select_by_aic(std::span<const EtsModel> candidates);

/// l + (phi + ... + phi^h) b for h = 1..horizon.
std::vector<double> forecast_ets(const EtsModel& model, std::size_t horizon);
std::vector<double> forecast_ets(const EtsModel& model, const EtsState& state, std::size_t horizon);

std::string_view ets_error_name(EtsError error);
std::string_view ets_trend_name(EtsTrend trend);
EtsError ets_error_from_name(std::string_view name);
EtsTrend ets_trend_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// ARIMA(2,1,0) with optional hour regressors on the differenced equation:
//   dy_t = c + phi1 dy_{t-1} + phi2 dy_{t-2} + beta . x(hour_t) + e_t
// fitted by conditional least squares.
// ---------------------------------------------------------------------------

enum class HourRegressors { None, Factor, Quadratic };

std::string_view hour_regressors_name(HourRegressors kind);  // none, factor, quadratic
HourRegressors hour_regressors_from_name(std::string_view name);

/// Regressor row: empty, 23 dummies for hours 1..23 (hour 0 is the reference
/// level), or (hour, hour^2).
std::vector<double> hour_regressors(HourRegressors kind, int hour);

struct ArimaModel {
    HourRegressors exog = HourRegressors::None;
    double constant = 0.0;
    std::array<double, 2> ar{0.0, 0.0};
    std::vector<double> beta;              // zero where dropped
    std::vector<std::size_t> dropped;      // regressor indices absent from training
    double residual_variance = 0.0;
    double aic = 0.0;
    std::size_t observations = 0;
    bool stationary = true;  // roots of 1 - phi1 z - phi2 z^2 outside the unit circle

    std::string name() const;  // ARIMA, ARIMAF, ARIMAQ
};

/// `hours` is aligned with `values`; it may be empty when `exog` is None.
ArimaModel fit_arima(std::span<const double> values, std::span<const int> hours, HourRegressors exog);

/// Iterates the differenced equation from the last three history values,
/// feeding predictions back, and integrates onto the last value.
std::vector<double> forecast_arima(const ArimaModel& model, std::span<const double> history,
                                   std::span<const int> future_hours, std::size_t horizon);

bool ar2_stationary(double phi1, double phi2);

}  // namespace thermocast
