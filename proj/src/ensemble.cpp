#include "thermocast/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "thermocast/error.hpp"
#include "thermocast/preprocess.hpp"

namespace thermocast {

namespace {

void check_scores(std::span<const MemberScore> scores) {
    if (scores.empty()) throw DataError("ensemble needs at least one member");
    for (const auto& s : scores)
        if (!std::isfinite(s.validation_mae) || s.validation_mae < 0.0)
            throw DataError("member " + s.id + " has an invalid validation MAE");
}

EnsembleMember member_from(const MemberScore& s, double weight) { return {s.id, s.past_size, weight, s.validation_mae}; }

}  // namespace

std::string_view strategy_name(Strategy strategy) {
    switch (strategy) {
        case Strategy::Best: return "BEST";
        case Strategy::CombEq: return "COMB-EQ";
        case Strategy::CombExp: return "COMB-EXP";
    }
    return "?";
}

Strategy strategy_from_name(std::string_view name) {
    if (name == "BEST") return Strategy::Best;
    if (name == "COMB-EQ") return Strategy::CombEq;
    if (name == "COMB-EXP") return Strategy::CombExp;
    throw ConfigError("unknown ensemble strategy '" + std::string(name) + "'");
}

double EnsembleSpec::weight_sum() const {
    double sum = 0.0;
    for (const auto& m : members) sum += m.weight;
    return sum;
}

EnsembleSpec select_best(std::span<const MemberScore> scores) {
    check_scores(scores);
    const auto* best = &scores.front();
    for (const auto& s : scores)
        if (s.validation_mae < best->validation_mae ||
            (s.validation_mae == best->validation_mae && s.past_size < best->past_size))
            best = &s;
    return {Strategy::Best, {member_from(*best, 1.0)}};
}

EnsembleSpec combine_uniform(std::span<const MemberScore> scores) {
    check_scores(scores);
    EnsembleSpec spec{Strategy::CombEq, {}};
    const double w = 1.0 / static_cast<double>(scores.size());
    for (const auto& s : scores) spec.members.push_back(member_from(s, w));
    return spec;
}

EnsembleSpec combine_softmax(std::span<const MemberScore> scores) {
    check_scores(scores);
    std::vector<double> inverse;
    for (const auto& s : scores) {
        if (s.validation_mae == 0.0)
            throw DataError("member " + s.id + " has zero validation MAE; use BEST, it dominates any combination");
        inverse.push_back(1.0 / s.validation_mae);
    }
    const double top = *std::max_element(inverse.begin(), inverse.end());
    double total = 0.0;
    for (auto& v : inverse) {
        v = std::exp(v - top);
        total += v;
    }
    EnsembleSpec spec{Strategy::CombExp, {}};
    for (std::size_t i = 0; i < scores.size(); ++i) spec.members.push_back(member_from(scores[i], inverse[i] / total));
    return spec;
}

EnsembleSpec build_ensemble(Strategy strategy, std::span<const MemberScore> scores) {
    switch (strategy) {
        case Strategy::Best: return select_best(scores);
        case Strategy::CombEq: return combine_uniform(scores);
        case Strategy::CombExp: return combine_softmax(scores);
    }
    throw ConfigError("unknown ensemble strategy");
}

std::vector<double> predict_ensemble(const EnsembleSpec& spec, std::span<const std::vector<double>> member_deltas,
                                     double anchor) {
    if (member_deltas.size() != spec.members.size() || member_deltas.empty())
        throw DataError("one output vector per ensemble member required");
    const std::size_t z_count = member_deltas.front().size();
    std::vector<double> combined(z_count, 0.0);
    for (std::size_t m = 0; m < spec.members.size(); ++m) {
        if (member_deltas[m].size() != z_count) throw DataError("ensemble members disagree on the horizon");
        for (std::size_t z = 0; z < z_count; ++z) combined[z] += spec.members[m].weight * member_deltas[m][z];
    }
    return invert_difference(combined, anchor);
}

ForecastMatrix combine_forecasts(const EnsembleSpec& spec, std::span<const ForecastMatrix> members) {
    if (members.size() != spec.members.size() || members.empty())
        throw DataError("one forecast matrix per ensemble member required");
    ForecastMatrix out;
    out.horizon = members.front().horizon;
    out.origins = members.front().origins;
    out.values.assign(members.front().values.size(), 0.0);
    for (std::size_t m = 0; m < members.size(); ++m) {
        if (members[m].horizon != out.horizon || members[m].origins != out.origins)
            throw DataError("ensemble member forecasts are not aligned");
        const double w = spec.members[m].weight;
        for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += w * members[m].values[k];
    }
    return out;
}

}  // namespace thermocast
