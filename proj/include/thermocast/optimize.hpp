#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace thermocast {

struct MinimizeResult {
    std::vector<double> point;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    double tolerance = 1e-8;  // simplex size at convergence
    std::size_t max_iterations = 20000;
};

/// Derivative-free minimization from a fixed start with per-coordinate initial
/// simplex steps. The objective may return +inf to reject a point.
MinimizeResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                           std::span<const double> start, std::span<const double> steps,
                           const NelderMeadOptions& options = {});

}  // namespace thermocast
