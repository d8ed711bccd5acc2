#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "thermocast/baselines.hpp"
#include "thermocast/error.hpp"
#include "thermocast/optimize.hpp"
#include "thermocast/random.hpp"

using namespace thermocast;

namespace {

std::vector<double> ar2_series(std::uint64_t seed, std::size_t n, double phi1, double phi2) {
    Rng rng(seed);
    std::vector<double> y{0.0, 0.0, 0.0};
    double d1 = 0.0, d2 = 0.0;
    while (y.size() < n) {
        const double d = phi1 * d1 + phi2 * d2 + rng.normal();
        y.push_back(y.back() + d);
        d2 = d1;
        d1 = d;
    }
    return y;
}

}  // namespace

TEST_CASE("nelder_mead finds a quadratic minimum") {
    auto f = [](std::span<const double> x) { return (x[0] - 1) * (x[0] - 1) + 3 * (x[1] + 2) * (x[1] + 2); };
    const std::vector<double> start{0, 0}, steps{0.5, 0.5};
    const auto r = nelder_mead(f, start, steps);
    CHECK(r.converged);
    CHECK(r.point[0] == Catch::Approx(1.0).margin(1e-4));
    CHECK(r.point[1] == Catch::Approx(-2.0).margin(1e-4));
}

TEST_CASE("nelder_mead respects infinite barriers") {
    auto f = [](std::span<const double> x) {
        if (x[0] < 0.5) return std::numeric_limits<double>::infinity();
        return (x[0] - 0.2) * (x[0] - 0.2);
    };
    const std::vector<double> start{1.0}, steps{0.3};
    const auto r = nelder_mead(f, start, steps);
    CHECK(r.point[0] >= 0.5);
    CHECK(r.point[0] == Catch::Approx(0.5).margin(1e-3));
}

TEST_CASE("simple smoothing with alpha near one is the naive forecast") {
    const std::vector<double> y{20.0, 20.5, 21.0, 20.8, 20.1};
    EtsParams p;
    p.alpha = 1.0;
    p.level0 = 20.0;
    const auto r = ets_filter(EtsError::Additive, EtsTrend::None, p, y);
    for (std::size_t t = 1; t < y.size(); ++t) CHECK(r.one_step[t] == Catch::Approx(y[t - 1]));
}

TEST_CASE("damped trend with phi one equals Holt") {
    const std::vector<double> y{20.0, 20.5, 21.0, 20.8, 20.1, 20.4};
    EtsParams p;
    p.alpha = 0.4;
    p.beta = 0.1;
    p.phi = 1.0;
    p.level0 = 20.0;
    p.trend0 = 0.1;
    const auto damped = ets_filter(EtsError::Additive, EtsTrend::Damped, p, y);
    const auto holt = ets_filter(EtsError::Additive, EtsTrend::Additive, p, y);
    CHECK(damped.one_step == holt.one_step);
}

TEST_CASE("damped forecast by hand") {
    EtsModel m;
    m.trend = EtsTrend::Damped;
    m.params.phi = 0.5;
    const auto f = forecast_ets(m, EtsState{20.0, 0.1}, 2);
    CHECK(f[0] == Catch::Approx(20.05).epsilon(1e-12));
    CHECK(f[1] == Catch::Approx(20.075).epsilon(1e-12));

    EtsModel flat;
    flat.final_state = {18.0, 0.0};
    CHECK(forecast_ets(flat, 3) == std::vector<double>{18.0, 18.0, 18.0});
}

TEST_CASE("refit recovers a damped-trend generator") {
    Rng rng(9);
    EtsParams truth;
    truth.alpha = 0.4;
    truth.beta = 0.05;
    truth.phi = 0.9;
    std::vector<double> y;
    double level = 20.0, trend = 0.05;
    for (int t = 0; t < 2000; ++t) {
        const double e = 0.1 * rng.normal();
        const double fitted = level + truth.phi * trend;
        y.push_back(fitted + e);
        level = fitted + truth.alpha * e;
        trend = truth.phi * trend + truth.beta * e;
    }
    truth.level0 = 20.0;
    truth.trend0 = 0.05;
    const double generator_mse = ets_filter(EtsError::Additive, EtsTrend::Damped, truth, y).sse / y.size();
    const auto fitted = fit_ets(y, EtsError::Additive, EtsTrend::Damped);
    CHECK(fitted.mse <= generator_mse * 1.05);
    CHECK(fitted.mse >= generator_mse * 0.95);
    CHECK(fitted.name() == "AAdN");
}

TEST_CASE("the fitted family and AIC selection") {
    auto y = ar2_series(4, 400, 0.5, 0.2);
    for (auto& v : y) v += 100.0;  // keeps multiplicative errors well defined
    const auto family = fit_ets_family(y);
    REQUIRE(family.size() == 6);
    for (const auto& m : family) {
        CHECK(m.params.alpha > 0.0);
        CHECK(m.params.alpha < 1.0);
        CHECK(std::isfinite(m.aic));
    }
    const auto best = select_by_aic(family);
    for (const auto& m : family) CHECK(best.aic <= m.aic);

    std::vector<EtsModel> pair(2);
    pair[0].aic = 100;
    pair[1].aic = 90;
    pair[1].trend = EtsTrend::Additive;
    CHECK(select_by_aic(pair).trend == EtsTrend::Additive);
}

TEST_CASE("ARIMA recovers AR coefficients") {
    std::vector<double> phi1, phi2;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = fit_arima(ar2_series(seed, 5000, 0.5, 0.3), {}, HourRegressors::None);
        phi1.push_back(m.ar[0]);
        phi2.push_back(m.ar[1]);
    }
    std::sort(phi1.begin(), phi1.end());
    std::sort(phi2.begin(), phi2.end());
    CHECK(phi1[2] == Catch::Approx(0.5).margin(0.05));
    CHECK(phi2[2] == Catch::Approx(0.3).margin(0.05));
}

TEST_CASE("ARIMA on a constant series") {
    const std::vector<double> y(50, 20.0);
    const auto m = fit_arima(y, {}, HourRegressors::None);
    CHECK(std::abs(m.ar[0]) < 1e-9);
    CHECK(std::abs(m.ar[1]) < 1e-9);
    CHECK(std::abs(m.constant) < 1e-9);
    CHECK(m.residual_variance < 1e-18);
}

TEST_CASE("hour regressors") {
    const auto factor = hour_regressors(HourRegressors::Factor, 0);
    CHECK(factor.size() == 23);
    CHECK(std::all_of(factor.begin(), factor.end(), [](double v) { return v == 0.0; }));
    CHECK(hour_regressors(HourRegressors::Factor, 5)[4] == 1.0);
    CHECK(hour_regressors(HourRegressors::Quadratic, 3) == std::vector<double>{3.0, 9.0});
    CHECK(hour_regressors(HourRegressors::None, 3).empty());
}

TEST_CASE("ARIMA forecasts by hand") {
    ArimaModel flat;
    const std::vector<double> history{1.0, 2.0, 2.5};
    CHECK(forecast_arima(flat, history, {}, 3) == std::vector<double>{2.5, 2.5, 2.5});

    ArimaModel ramp;
    ramp.ar = {1.0, 0.0};
    CHECK(forecast_arima(ramp, history, {}, 3) == std::vector<double>{3.0, 3.5, 4.0});
}

TEST_CASE("ARIMA forecast matches a direct recursion") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        ArimaModel m;
        m.exog = HourRegressors::Quadratic;
        m.constant = 0.1 * rng.normal();
        m.ar = {rng.uniform() - 0.5, rng.uniform() - 0.5};
        m.beta = {0.01 * rng.normal(), 0.001 * rng.normal()};
        const std::vector<double> history{20 + rng.normal(), 20 + rng.normal(), 20 + rng.normal()};
        std::vector<int> hours;
        for (int z = 0; z < 6; ++z) hours.push_back(static_cast<int>(rng.below(24)));
        const auto f = forecast_arima(m, history, hours, 6);

        double d1 = history[2] - history[1], d2 = history[1] - history[0], level = history[2];
        for (int z = 0; z < 6; ++z) {
            const double h = hours[z];
            const double d = m.constant + m.ar[0] * d1 + m.ar[1] * d2 + m.beta[0] * h + m.beta[1] * h * h;
            level += d;
            CHECK(f[z] == Catch::Approx(level).margin(1e-10));
            d2 = d1;
            d1 = d;
        }
    }
}

TEST_CASE("AR(2) stationarity") {
    CHECK(ar2_stationary(0.5, 0.3));
    CHECK_FALSE(ar2_stationary(1.0, 0.1));
    CHECK_FALSE(ar2_stationary(0.2, -1.1));
}
