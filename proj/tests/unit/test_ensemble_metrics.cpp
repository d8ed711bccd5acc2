#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thermocast/ensemble.hpp"
#include "thermocast/error.hpp"
#include "thermocast/metrics.hpp"
#include "thermocast/random.hpp"

using namespace thermocast;

TEST_CASE("point metrics") {
    const std::vector<double> a{11.0}, b{10.0};
    CHECK(mae(a, b) == 1.0);
    CHECK(rmse(a, b) == 1.0);
    CHECK(smape(a, b) == Catch::Approx(100.0 / 10.5).epsilon(1e-12));
    CHECK(smape(a, b) == smape(b, a));
    CHECK(mae(std::vector<double>{1, 3}, std::vector<double>{0, 0}) == 2.0);
    CHECK(rmse(std::vector<double>{1, 3}, std::vector<double>{0, 0}) == std::sqrt(5.0));
    CHECK(smape(std::vector<double>{4, 5}, std::vector<double>{4, 5}) == 0.0);
    CHECK_THROWS_AS(smape(std::vector<double>{0.0}, std::vector<double>{0.0}), DataError);
}

TEST_CASE("aggregate intervals") {
    std::vector<WindowError> one{{0, 0.5, 0.6, 2.0}};
    const auto single = aggregate(one, LossKind::Mae);
    CHECK(single.degenerate);
    CHECK(single.lower == 0.5);
    CHECK(single.upper == 0.5);

    std::vector<WindowError> same(10, WindowError{0, 0.5, 0.6, 2.0});
    const auto flat = aggregate(same, LossKind::Mae);
    CHECK(flat.lower == flat.mean);
    CHECK(flat.upper == flat.mean);

    const std::vector<double> values{1.0, 2.0, 3.0, 4.0};
    const auto ci = mean_with_ci(values, LossKind::Mae);
    const double s = std::sqrt(5.0 / 3.0);
    CHECK(ci.mean == 2.5);
    CHECK(ci.upper - ci.mean == Catch::Approx(kZ99 * s / 2.0).epsilon(1e-12));
}

TEST_CASE("horizon curves") {
    ForecastMatrix f;
    f.horizon = 2;
    f.origins = {0, 1};
    f.values = {1.0, 2.0, 1.0, 2.0};
    const std::vector<double> actuals{1.0, 4.0, 2.0, 2.0};
    const auto curve = aggregate_by_horizon(f, actuals, LossKind::Mae);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].mean == 0.5);
    CHECK(curve[1].mean == 1.0);
    const auto rm = aggregate_by_horizon(f, actuals, LossKind::Rmse);
    CHECK(rm[1].mean == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("best member selection") {
    const std::vector<MemberScore> scores{{"a", 5, 0.2}, {"b", 7, 0.1}};
    const auto best = select_best(scores);
    REQUIRE(best.members.size() == 1);
    CHECK(best.members[0].past_size == 7);
    CHECK(best.members[0].weight == 1.0);

    const std::vector<MemberScore> tie{{"x", 9, 0.1}, {"y", 3, 0.1}};
    CHECK(select_best(tie).members[0].past_size == 3);
}

TEST_CASE("uniform weights") {
    std::vector<MemberScore> scores;
    for (std::size_t i = 0; i < 11; ++i) scores.push_back({"m" + std::to_string(i), 2 * i + 1, 0.1 + 0.01 * i});
    const auto spec = combine_uniform(scores);
    for (const auto& m : spec.members) CHECK(m.weight == Catch::Approx(1.0 / 11.0));
    CHECK(spec.weight_sum() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(combine_uniform(std::vector<MemberScore>{{"s", 1, 0.3}}).members[0].weight == 1.0);
}

TEST_CASE("softmax weights") {
    const std::vector<MemberScore> scores{{"a", 1, 0.5}, {"b", 3, 1.0}};
    const auto spec = combine_softmax(scores);
    CHECK(spec.members[0].weight == Catch::Approx(0.7311).margin(1e-4));
    CHECK(spec.members[1].weight == Catch::Approx(0.2689).margin(1e-4));

    const std::vector<MemberScore> equal{{"a", 1, 0.3}, {"b", 3, 0.3}, {"c", 5, 0.3}};
    for (const auto& m : combine_softmax(equal).members) CHECK(m.weight == 1.0 / 3.0);

    // Tiny MAEs give huge exponents; the shift keeps them finite.
    const std::vector<MemberScore> sharp{{"a", 1, 1e-3}, {"b", 3, 2e-3}};
    const auto s = combine_softmax(sharp);
    CHECK(std::isfinite(s.members[1].weight));
    CHECK(s.members[0].weight == 1.0);

    CHECK_THROWS(combine_softmax(std::vector<MemberScore>{{"z", 1, 0.0}}));
}

TEST_CASE("ensemble prediction is linear in deltas") {
    EnsembleSpec spec;
    spec.strategy = Strategy::CombEq;
    spec.members = {{"a", 1, 0.5, 0.1}, {"b", 3, 0.5, 0.1}};
    const std::vector<std::vector<double>> deltas{{1.0, 1.0}, {3.0, 3.0}};
    CHECK(predict_ensemble(spec, deltas, 10.0) == std::vector<double>{12.0, 14.0});

    EnsembleSpec best;
    best.members = {{"a", 1, 1.0, 0.1}};
    const std::vector<std::vector<double>> only{{0.5, -0.25}};
    CHECK(predict_ensemble(best, only, 20.0) == std::vector<double>{20.5, 20.25});
}

TEST_CASE("combined error is bounded by the weighted member errors") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t rows = 20, horizon = 4, members = 3;
        std::vector<double> actuals(rows * horizon);
        for (auto& a : actuals) a = rng.normal();
        std::vector<ForecastMatrix> forecasts(members);
        std::vector<MemberScore> scores;
        for (std::size_t m = 0; m < members; ++m) {
            forecasts[m].horizon = horizon;
            for (std::size_t r = 0; r < rows; ++r) forecasts[m].origins.push_back(r);
            for (double a : actuals) forecasts[m].values.push_back(a + rng.normal());
            scores.push_back({"m" + std::to_string(m), 2 * m + 1, evaluate("m", forecasts[m], actuals).mae.mean});
        }
        const auto spec = combine_softmax(scores);
        double bound = 0.0;
        for (std::size_t m = 0; m < members; ++m) bound += spec.members[m].weight * scores[m].validation_mae;
        CHECK(evaluate("e", combine_forecasts(spec, forecasts), actuals).mae.mean <= bound + 1e-12);
    }
}

TEST_CASE("strategy names") {
    CHECK(strategy_name(Strategy::CombExp) == "COMB-EXP");
    CHECK(strategy_from_name("COMB-EQ") == Strategy::CombEq);
    CHECK(strategy_from_name("BEST") == Strategy::Best);
    CHECK_THROWS_AS(strategy_from_name("MEDIAN"), ConfigError);
}
