#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermocast/ensemble.hpp"
#include "thermocast/mlp.hpp"
#include "thermocast/pipeline.hpp"

namespace thermocast {

/// "d+h+W" -> {h, W}; the target symbol d is optional and implied.
std::vector<Channel> parse_covariate_set(std::string_view text);
/// {h, W} -> "d+h+W", channels in d, h, W, H, Q, R order.
std::string format_covariate_set(const std::vector<Channel>& covariates);

struct GridSpec {
    std::vector<std::vector<Channel>> covariate_sets{{}};
    std::vector<std::vector<HiddenLayer>> layouts;
    std::vector<double> learning_rates;
    std::vector<double> momenta;
    std::vector<double> weight_decays;
    std::vector<std::size_t> target_past{5};
    std::vector<std::uint64_t> seeds{42};
    std::size_t covariate_past = 5;
    std::size_t horizon = 12;
    std::size_t epochs = 2000;
    std::size_t patience = 50;

    void validate() const;
};

/// Covariate sets {d}, {d,h}, {d,h,W} over the standard hyperparameter values.
GridSpec default_grid();

struct TrialConfig {
    std::size_t index = 0;  // position in enumeration order
    std::vector<Channel> covariates;
    std::size_t target_past = 5;
    std::vector<HiddenLayer> hidden;
    double learning_rate = 0.0;
    double momentum = 0.0;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const TrialConfig&) const = default;
};

/// Cartesian product, lexicographic over covariates, I(d), layout, eta, mu,
/// eps, seed (the last axis varies fastest).
std::vector<TrialConfig> enumerate_grid(const GridSpec& spec);

WindowSpec trial_window(const GridSpec& spec, const TrialConfig& trial);
MlpConfig trial_mlp_config(const GridSpec& spec, const TrialConfig& trial);

struct TrialResult {
    TrialConfig config;
    bool diverged = false;
    double mae = 0.0;  // validation, NaN when diverged
    double rmse = 0.0;
    double smape = 0.0;
    std::size_t best_epoch = 0;
    double wall_seconds = 0.0;
    bool resumed = false;  // read back from the store, not recomputed
};

/// Trains and scores one configuration on the validation partition.
TrialResult run_trial(const GridSpec& spec, const TrialConfig& trial, const Dataset& data);

/// Runs every trial missing from the append-only CSV store at `store` (if
/// given) with up to `jobs` trials in flight. Rows already present are kept
/// as they are. Results come back in enumeration order.
std::vector<TrialResult> run_grid(const GridSpec& spec, std::span<const TrialConfig> trials, const Dataset& data,
                                  const std::optional<std::filesystem::path>& store, std::size_t jobs = 1);

std::vector<TrialResult> read_trial_store(const std::filesystem::path& path);

/// Lowest validation MAE among trials that did not diverge.
const TrialResult& best_trial(std::span<const TrialResult> results);

struct BoxStats {
    std::string axis_value;
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Linear interpolation between closest ranks: position p * (n - 1) of the
/// sorted values.
double quantile(std::span<const double> sorted, double p);

/// Validation MAE summaries per value of `axis`, one of covariates,
/// target_past, hidden, learning_rate, momentum, weight_decay, seed.
/// Diverged trials are excluded. Groups appear in enumeration order.
std::vector<BoxStats> box_stats(std::span<const TrialResult> results, std::string_view axis);

void write_box_stats_csv(const std::filesystem::path& path, std::string_view axis, std::span<const BoxStats> stats);

struct SweepMember {
    MlpModel model;
    TrainReport report;
    MemberScore score;
};

/// One network per I(d) for a covariate set, each trained with `config`.
std::vector<SweepMember> sweep_past_sizes(const Dataset& data, const std::vector<Channel>& covariates,
                                          std::span<const std::size_t> sizes, const MlpConfig& config,
                                          std::size_t covariate_past = 5, std::size_t horizon = 12,
                                          std::size_t jobs = 1);

/// {1, 3, ..., 21}.
std::vector<std::size_t> default_past_sizes();

std::vector<MemberScore> member_scores(std::span<const SweepMember> members);

EnsembleModel assemble_ensemble(Strategy strategy, std::span<const SweepMember> members);

}  // namespace thermocast
