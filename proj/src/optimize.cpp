#include "thermocast/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <memory>

#include "thermocast/error.hpp"

namespace thermocast {

namespace {

using Objective = std::function<double(std::span<const double>)>;

constexpr double kBarrier = 1e300;

double trampoline(const gsl_vector* x, void* params) {
    const auto& objective = *static_cast<const Objective*>(params);
    const double value = objective({x->data, x->size});
    // GSL rejects non-finite vertices, so barriers become a huge finite value.
    return std::isfinite(value) ? value : kBarrier;
}

struct VectorFree {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerFree {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

}  // namespace

MinimizeResult nelder_mead(const Objective& objective, std::span<const double> start, std::span<const double> steps,
                           const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    if (n == 0 || steps.size() != n) throw ConfigError("nelder_mead needs matching start and step vectors");

    MinimizeResult result;
    if (!std::isfinite(objective(start))) throw DataError("objective is not finite at the starting point");

    gsl_set_error_handler_off();
    std::unique_ptr<gsl_vector, VectorFree> x(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorFree> step(gsl_vector_alloc(n));
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x.get(), i, start[i]);
        gsl_vector_set(step.get(), i, steps[i]);
    }
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerFree> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    gsl_multimin_function fn;
    fn.n = n;
    fn.f = &trampoline;
    fn.params = const_cast<Objective*>(&objective);
    if (gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get()) != GSL_SUCCESS)
        throw DataError("nelder_mead could not initialize the simplex");

    for (result.iterations = 0; result.iterations < options.max_iterations; ++result.iterations) {
        if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
        const double size = gsl_multimin_fminimizer_size(minimizer.get());
        if (gsl_multimin_test_size(size, options.tolerance) == GSL_SUCCESS) {
            result.converged = true;
            break;
        }
    }
    const gsl_vector* best = gsl_multimin_fminimizer_x(minimizer.get());
    result.point.assign(best->data, best->data + n);
    result.value = gsl_multimin_fminimizer_minimum(minimizer.get());
    return result;
}

}  // namespace thermocast
