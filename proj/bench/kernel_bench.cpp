#include <benchmark/benchmark.h>

#include <cmath>

#include "thermocast/kernels.hpp"
#include "thermocast/mi.hpp"
#include "thermocast/mlp.hpp"
#include "thermocast/preprocess.hpp"
#include "thermocast/random.hpp"

using namespace thermocast;

namespace {

struct WindowFixture {
    std::vector<double> target, delta, irradiance;
    std::vector<int> hours;
    std::vector<std::size_t> origins;
    kernels::WindowSources src;

    explicit WindowFixture(std::size_t n) {
        Rng rng(1);
        for (std::size_t i = 0; i < n; ++i) {
            target.push_back(20.0 + std::sin(i * 0.065) + 0.01 * rng.normal());
            irradiance.push_back(rng.normal());
            hours.push_back(static_cast<int>((i / 4) % 24));
        }
        delta = difference(target);
        src.target = target;
        src.target_delta = delta;
        src.covariates = {irradiance};
        src.covariate_past = {5};
        src.hours = hours;
        src.target_past = 21;
        src.hour_blocks = 1;
        src.horizon = 12;
        for (std::size_t t = 21; t + 12 < n; ++t) origins.push_back(t);
    }
};

PatternSet random_patterns(std::size_t rows, std::size_t dim) {
    PatternSet p;
    p.input_dim = dim;
    p.horizon = 12;
    Rng rng(2);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < dim; ++i) p.inputs.push_back(rng.normal());
        p.origins.push_back(r);
    }
    return p;
}

Mlp bench_net(std::size_t inputs) {
    MlpConfig config;
    config.inputs = inputs;
    config.hidden = parse_hidden_layout("24t-16t");
    config.outputs = 12;
    return Mlp(config);
}

ForecastMatrix random_forecasts(std::size_t rows, std::vector<double>& actuals) {
    ForecastMatrix f;
    f.horizon = 12;
    Rng rng(3);
    for (std::size_t r = 0; r < rows; ++r) {
        f.origins.push_back(r);
        for (int z = 0; z < 12; ++z) {
            f.values.push_back(20 + rng.normal());
            actuals.push_back(20 + rng.normal());
        }
    }
    return f;
}

template <auto Kernel>
void BM_assemble(benchmark::State& state) {
    WindowFixture fx(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        PatternSet out;
        Kernel(fx.src, fx.origins, out);
        benchmark::DoNotOptimize(out.inputs.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fx.origins.size()));
}

template <auto Kernel>
void BM_forward(benchmark::State& state) {
    const auto patterns = random_patterns(static_cast<std::size_t>(state.range(0)), 50);
    const auto net = bench_net(50);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(net, patterns));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_window_errors(benchmark::State& state) {
    std::vector<double> actuals;
    const auto f = random_forecasts(static_cast<std::size_t>(state.range(0)), actuals);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(f, actuals));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_joint_histogram(benchmark::State& state) {
    Rng rng(4);
    std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        y[i] = x[i] + rng.normal();
    }
    const auto bx = bin_values(x, 64), by = bin_values(y, 64);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(bx, by, 64));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_assemble<kernels::serial::assemble_windows>)->Name("assemble_windows/serial")->Arg(3360);
BENCHMARK(BM_assemble<kernels::parallel::assemble_windows>)->Name("assemble_windows/parallel")->Arg(3360);
BENCHMARK(BM_forward<kernels::serial::forward_batch>)->Name("forward_batch/serial")->Arg(2000);
BENCHMARK(BM_forward<kernels::parallel::forward_batch>)->Name("forward_batch/parallel")->Arg(2000);
BENCHMARK(BM_window_errors<kernels::serial::window_errors>)->Name("window_errors/serial")->Arg(5000);
BENCHMARK(BM_window_errors<kernels::parallel::window_errors>)->Name("window_errors/parallel")->Arg(5000);
BENCHMARK(BM_joint_histogram<kernels::serial::joint_histogram>)->Name("joint_histogram/serial")->Arg(100000);
BENCHMARK(BM_joint_histogram<kernels::parallel::joint_histogram>)->Name("joint_histogram/parallel")->Arg(100000);

BENCHMARK_MAIN();
