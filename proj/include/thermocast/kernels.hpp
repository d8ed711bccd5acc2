#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "thermocast/metrics.hpp"
#include "thermocast/mlp.hpp"
#include "thermocast/preprocess.hpp"

// Data-parallel inner loops. Every kernel has a plain serial version kept as
// the reference for tests and the benchmark, and an OpenMP version used by the
// library. Both write each output slot from exactly one iteration, so their
// results are bitwise identical for any thread count.
namespace thermocast::kernels {

/// Per-timestep inputs for window assembly, already transformed.
struct WindowSources {
    std::span<const double> target;        // absolute, frame length N
    std::span<const double> target_delta;  // delta[i] = target[i+1] - target[i], length N-1
    std::vector<std::span<const double>> covariates;  // z-scored, each length N
    std::vector<std::size_t> covariate_past;
    std::span<const int> hours;  // length N
    std::size_t target_past = 0;
    std::size_t hour_blocks = 0;
    std::size_t horizon = 0;
    double delta_mean = 0.0;  // applied to target inputs only
    double delta_scale = 1.0;
};

namespace serial {
void assemble_windows(const WindowSources& src, std::span<const std::size_t> origins, PatternSet& out);
/// Raw network outputs (differenced space), rows x output_dim.
std::vector<double> forward_batch(const Mlp& net, const PatternSet& patterns);
std::vector<WindowError> window_errors(const ForecastMatrix& forecasts, std::span<const double> actuals);
/// Row-major bins x bins counts of (xbin, ybin) pairs.
std::vector<std::uint64_t> joint_histogram(std::span<const std::uint32_t> xbins, std::span<const std::uint32_t> ybins,
                                           std::size_t bins);
}  // namespace serial

namespace parallel {
void assemble_windows(const WindowSources& src, std::span<const std::size_t> origins, PatternSet& out);
std::vector<double> forward_batch(const Mlp& net, const PatternSet& patterns);
std::vector<WindowError> window_errors(const ForecastMatrix& forecasts, std::span<const double> actuals);
std::vector<std::uint64_t> joint_histogram(std::span<const std::uint32_t> xbins, std::span<const std::uint32_t> ybins,
                                           std::size_t bins);
}  // namespace parallel

}  // namespace thermocast::kernels
