#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermocast/metrics.hpp"

namespace thermocast {

/// Validation score of one member of a past-size sweep.
struct MemberScore {
    std::string id;
    std::size_t past_size = 0;
    double validation_mae = 0.0;
};

enum class Strategy { Best, CombEq, CombExp };

std::string_view strategy_name(Strategy strategy);  // BEST, COMB-EQ, COMB-EXP
Strategy strategy_from_name(std::string_view name);

struct EnsembleMember {
    std::string id;  // model reference
    std::size_t past_size = 0;
    double weight = 0.0;
    double validation_mae = 0.0;
};

/// Weights are non-negative and sum to one.
struct EnsembleSpec {
    Strategy strategy = Strategy::Best;
    std::vector<EnsembleMember> members;

    double weight_sum() const;
};

/// Lowest validation MAE; ties go to the smaller past size.
EnsembleSpec select_best(std::span<const MemberScore> scores);

/// Equal weights 1/M.
EnsembleSpec combine_uniform(std::span<const MemberScore> scores);

/// alpha_i = exp(1/MAE_i) / sum_j exp(1/MAE_j), evaluated with the largest
/// exponent subtracted. A zero MAE has no inverse and is rejected.
EnsembleSpec combine_softmax(std::span<const MemberScore> scores);

EnsembleSpec build_ensemble(Strategy strategy, std::span<const MemberScore> scores);

/// Weighted sum of member outputs in differenced space, reconstructed once
/// from the shared anchor.
std::vector<double> predict_ensemble(const EnsembleSpec& spec, std::span<const std::vector<double>> member_deltas,
                                     double anchor);

/// Combines per-member absolute forecast matrices that share origins.
ForecastMatrix combine_forecasts(const EnsembleSpec& spec, std::span<const ForecastMatrix> members);

}  // namespace thermocast
