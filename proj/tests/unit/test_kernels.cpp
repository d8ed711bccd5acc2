#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "thermocast/kernels.hpp"
#include "thermocast/mi.hpp"
#include "thermocast/mlp.hpp"
#include "thermocast/preprocess.hpp"

using namespace thermocast;

// The parallel kernels must agree with the serial reference bit for bit.

TEST_CASE("window assembly") {
    const auto frame = testutil::sine_frame(500);
    const auto& d = frame.at(Channel::Temperature);
    const auto delta = difference(d);
    const auto stats = compute_norm_stats(frame);
    const auto w = znormalize(frame.at(Channel::Irradiance), stats.at(Channel::Irradiance));
    std::vector<int> hours;
    for (std::size_t i = 0; i < frame.size(); ++i) hours.push_back(frame.hour(i));

    kernels::WindowSources src;
    src.target = d;
    src.target_delta = delta;
    src.covariates = {w};
    src.covariate_past = {5};
    src.hours = hours;
    src.target_past = 7;
    src.hour_blocks = 1;
    src.horizon = 12;
    std::vector<std::size_t> origins;
    for (std::size_t t = 7; t + 12 < frame.size(); t += 3) origins.push_back(t);

    PatternSet a, b;
    kernels::serial::assemble_windows(src, origins, a);
    kernels::parallel::assemble_windows(src, origins, b);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == b.targets);
    CHECK(a.actuals == b.actuals);
    CHECK(a.anchors == b.anchors);
    CHECK(a.origins == b.origins);
}

TEST_CASE("batched forward pass") {
    MlpConfig config;
    config.inputs = 10;
    config.hidden = parse_hidden_layout("16t-8l");
    config.outputs = 12;
    const Mlp net(config);
    PatternSet p;
    p.input_dim = 10;
    p.horizon = 12;
    Rng rng(4);
    for (std::size_t r = 0; r < 300; ++r) {
        for (int i = 0; i < 10; ++i) p.inputs.push_back(rng.normal());
        p.origins.push_back(r);
    }
    const auto serial = kernels::serial::forward_batch(net, p);
    CHECK(serial == kernels::parallel::forward_batch(net, p));
    const auto row = net.forward(p.input(17));
    CHECK(std::vector<double>(serial.begin() + 17 * 12, serial.begin() + 18 * 12) == row);
}

TEST_CASE("window errors") {
    ForecastMatrix f;
    f.horizon = 6;
    Rng rng(6);
    std::vector<double> actuals;
    for (std::size_t r = 0; r < 200; ++r) {
        f.origins.push_back(r);
        for (int z = 0; z < 6; ++z) {
            f.values.push_back(20 + rng.normal());
            actuals.push_back(20 + rng.normal());
        }
    }
    const auto a = kernels::serial::window_errors(f, actuals);
    const auto b = kernels::parallel::window_errors(f, actuals);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mae == b[i].mae);
        CHECK(a[i].rmse == b[i].rmse);
        CHECK(a[i].smape == b[i].smape);
    }
    CHECK(a[3].mae == mae(f.row(3), std::span<const double>(actuals).subspan(18, 6)));
}

TEST_CASE("joint histogram") {
    Rng rng(8);
    std::vector<double> x(20000), y(20000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        y[i] = x[i] * x[i] + rng.uniform();
    }
    const auto bx = bin_values(x, 32), by = bin_values(y, 32);
    const auto a = kernels::serial::joint_histogram(bx, by, 32);
    CHECK(a == kernels::parallel::joint_histogram(bx, by, 32));
    std::uint64_t total = 0;
    for (auto c : a) total += c;
    CHECK(total == x.size());
}
