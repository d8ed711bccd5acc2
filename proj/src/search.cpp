#include "thermocast/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>

#include "csv_util.hpp"
#include "thermocast/error.hpp"

namespace thermocast {

namespace {

constexpr const char* kStoreHeader =
    "index,covariates,target_past,hidden,learning_rate,momentum,weight_decay,seed,diverged,mae,rmse,smape,"
    "best_epoch,wall_seconds";

std::string metric_text(double v) { return std::isfinite(v) ? detail::format_double(v) : "nan"; }

std::string store_row(const TrialResult& r) {
    const auto& c = r.config;
    std::string row = std::to_string(c.index) + ',' + format_covariate_set(c.covariates) + ',' +
                      std::to_string(c.target_past) + ',' + format_hidden_layout(c.hidden) + ',' +
                      detail::format_double(c.learning_rate) + ',' + detail::format_double(c.momentum) + ',' +
                      detail::format_double(c.weight_decay) + ',' + std::to_string(c.seed) + ',' +
                      (r.diverged ? "1" : "0") + ',' + metric_text(r.mae) + ',' + metric_text(r.rmse) + ',' +
                      metric_text(r.smape) + ',' + std::to_string(r.best_epoch) + ',' +
                      detail::format_double(r.wall_seconds);
    return row;
}

std::uint64_t parse_unsigned(std::string_view text, const std::string& what) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw DataError("trial store: bad " + what);
    return v;
}

double parse_metric(std::string_view text) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    const auto v = detail::parse_double(text);
    if (!v) throw DataError("trial store: bad metric '" + std::string(text) + "'");
    return *v;
}

std::string axis_value(const TrialConfig& c, std::string_view axis) {
    if (axis == "covariates") return format_covariate_set(c.covariates);
    if (axis == "target_past") return std::to_string(c.target_past);
    if (axis == "hidden") return format_hidden_layout(c.hidden);
    if (axis == "learning_rate") return detail::format_double(c.learning_rate);
    if (axis == "momentum") return detail::format_double(c.momentum);
    if (axis == "weight_decay") return detail::format_double(c.weight_decay);
    if (axis == "seed") return std::to_string(c.seed);
    throw ConfigError("unknown hyperparameter axis '" + std::string(axis) + "'");
}

template <class T>
void require_nonempty(const std::vector<T>& axis, const char* name) {
    if (axis.empty()) throw ConfigError(std::string("grid.") + name + " must not be empty");
}

}  // namespace

std::vector<Channel> parse_covariate_set(std::string_view text) {
    std::vector<Channel> out;
    for (auto token : detail::split_fields(text, '+')) {
        if (token.empty()) throw ConfigError("empty symbol in covariate set '" + std::string(text) + "'");
        const Channel channel = channel_from_symbol(token);
        if (channel == Channel::Temperature) continue;
        if (std::find(out.begin(), out.end(), channel) != out.end())
            throw ConfigError("repeated symbol in covariate set '" + std::string(text) + "'");
        out.push_back(channel);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string format_covariate_set(const std::vector<Channel>& covariates) {
    auto sorted = covariates;
    std::sort(sorted.begin(), sorted.end());
    std::string out = "d";
    for (auto c : sorted) {
        if (c == Channel::Temperature) continue;
        out += '+';
        out += channel_symbol(c);
    }
    return out;
}

void GridSpec::validate() const {
    require_nonempty(covariate_sets, "covariate_sets");
    require_nonempty(layouts, "layouts");
    require_nonempty(learning_rates, "learning_rates");
    require_nonempty(momenta, "momenta");
    require_nonempty(weight_decays, "weight_decays");
    require_nonempty(target_past, "target_past");
    require_nonempty(seeds, "seeds");
    if (horizon < 1) throw ConfigError("grid.horizon must be at least 1");
    if (epochs < 1) throw ConfigError("grid.epochs must be at least 1");
    for (const auto& layout : layouts)
        if (layout.empty() || layout.size() > 2) throw ConfigError("grid.layouts entries need one or two layers");
}

GridSpec default_grid() {
    GridSpec g;
    g.covariate_sets = {{}, {Channel::Hour}, {Channel::Hour, Channel::Irradiance}};
    for (const char* layout : {"8t", "16t", "24t", "8t-8t", "24t-8t", "24t-16t", "16l-8l", "24l"})
        g.layouts.push_back(parse_hidden_layout(layout));
    g.learning_rates = {0.0005, 0.001, 0.005};
    g.momenta = {0.001, 0.005};
    g.weight_decays = {1e-6, 1e-5, 1e-4};
    return g;
}

std::vector<TrialConfig> enumerate_grid(const GridSpec& spec) {
    spec.validate();
    std::vector<TrialConfig> out;
    for (const auto& cov : spec.covariate_sets)
        for (auto past : spec.target_past)
            for (const auto& layout : spec.layouts)
                for (double lr : spec.learning_rates)
                    for (double mu : spec.momenta)
                        for (double eps : spec.weight_decays)
                            for (auto seed : spec.seeds) {
                                TrialConfig c;
                                c.index = out.size();
                                c.covariates = cov;
                                std::sort(c.covariates.begin(), c.covariates.end());
                                c.target_past = past;
                                c.hidden = layout;
                                c.learning_rate = lr;
                                c.momentum = mu;
                                c.weight_decay = eps;
                                c.seed = seed;
                                out.push_back(std::move(c));
                            }
    return out;
}

WindowSpec trial_window(const GridSpec& spec, const TrialConfig& trial) {
    return make_window_spec(trial.covariates, trial.target_past, spec.covariate_past, spec.horizon);
}

MlpConfig trial_mlp_config(const GridSpec& spec, const TrialConfig& trial) {
    MlpConfig c;
    c.hidden = trial.hidden;
    c.learning_rate = trial.learning_rate;
    c.momentum = trial.momentum;
    c.weight_decay = trial.weight_decay;
    c.epochs = spec.epochs;
    c.patience = spec.patience;
    c.seed = trial.seed;
    return fit_config(c, trial_window(spec, trial));
}

TrialResult run_trial(const GridSpec& spec, const TrialConfig& trial, const Dataset& data) {
    const auto started = std::chrono::steady_clock::now();
    TrialResult result;
    result.config = trial;
    const auto window = trial_window(spec, trial);
    try {
        const auto trained = train_model(data, window, trial_mlp_config(spec, trial));
        const auto origins = evaluation_origins(data, Split::Validation, window.horizon, window.max_past());
        const auto report = evaluate("trial", forecast(trained.model, data, origins),
                                     window_actuals(data, origins, window.horizon));
        result.mae = report.mae.mean;
        result.rmse = report.rmse.mean;
        result.smape = report.smape.mean;
        result.best_epoch = trained.report.best_epoch;
    } catch (const DivergenceError&) {
        result.diverged = true;
        result.mae = result.rmse = result.smape = std::numeric_limits<double>::quiet_NaN();
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::vector<TrialResult> read_trial_store(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kStoreHeader)
        throw DataError("trial store " + path.string() + " has an unexpected header");
    std::vector<TrialResult> out;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_fields(line);
        // A row cut short by an interrupted write is ignored and recomputed.
        if (f.size() != 14) continue;
        TrialResult r;
        r.config.index = parse_unsigned(f[0], "index");
        r.config.covariates = parse_covariate_set(f[1]);
        r.config.target_past = parse_unsigned(f[2], "target_past");
        r.config.hidden = parse_hidden_layout(f[3]);
        r.config.learning_rate = parse_metric(f[4]);
        r.config.momentum = parse_metric(f[5]);
        r.config.weight_decay = parse_metric(f[6]);
        r.config.seed = parse_unsigned(f[7], "seed");
        r.diverged = f[8] == "1";
        r.mae = parse_metric(f[9]);
        r.rmse = parse_metric(f[10]);
        r.smape = parse_metric(f[11]);
        r.best_epoch = parse_unsigned(f[12], "best_epoch");
        r.wall_seconds = parse_metric(f[13]);
        r.resumed = true;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TrialResult> run_grid(const GridSpec& spec, std::span<const TrialConfig> trials, const Dataset& data,
                                  const std::optional<std::filesystem::path>& store, std::size_t jobs) {
    std::vector<std::optional<TrialResult>> slots(trials.size());
    std::map<std::size_t, std::size_t> slot_of;
    for (std::size_t i = 0; i < trials.size(); ++i) slot_of[trials[i].index] = i;

    std::ofstream out;
    if (store) {
        const bool exists = std::filesystem::exists(*store);
        if (exists) {
            for (auto& r : read_trial_store(*store)) {
                const auto it = slot_of.find(r.config.index);
                if (it == slot_of.end()) continue;
                if (!(r.config == trials[it->second]))
                    throw ConfigError("trial store " + store->string() + " was written for a different grid (row " +
                                      std::to_string(r.config.index) + ")");
                slots[it->second] = std::move(r);
            }
        } else if (store->has_parent_path()) {
            std::filesystem::create_directories(store->parent_path());
        }
        out.open(*store, std::ios::binary | std::ios::app);
        if (!out) throw IoError("cannot open trial store " + store->string());
        if (!exists) out << kStoreHeader << '\n' << std::flush;
    }

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < trials.size(); ++i)
        if (!slots[i]) pending.push_back(i);

    std::exception_ptr failure;
    bool write_failed = false;
    const int threads = static_cast<int>(std::max<std::size_t>(jobs, 1));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t k = 0; k < pending.size(); ++k) {
        const std::size_t i = pending[k];
        try {
            auto result = run_trial(spec, trials[i], data);
#pragma omp critical(thermocast_trial_store)
            {
                if (store) {
                    out << store_row(result) << '\n' << std::flush;
                    if (!out) write_failed = true;
                }
                slots[i] = std::move(result);
            }
        } catch (...) {
#pragma omp critical(thermocast_trial_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    if (write_failed) throw IoError("failed to append to trial store " + store->string());

    std::vector<TrialResult> results;
    results.reserve(slots.size());
    for (auto& s : slots) results.push_back(std::move(*s));
    std::sort(results.begin(), results.end(),
              [](const TrialResult& a, const TrialResult& b) { return a.config.index < b.config.index; });
    return results;
}

const TrialResult& best_trial(std::span<const TrialResult> results) {
    const TrialResult* best = nullptr;
    for (const auto& r : results) {
        if (r.diverged || !std::isfinite(r.mae)) continue;
        if (!best || r.mae < best->mae || (r.mae == best->mae && r.config.index < best->config.index)) best = &r;
    }
    if (!best) throw DataError("every trial diverged");
    return *best;
}

double quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<BoxStats> box_stats(std::span<const TrialResult> results, std::string_view axis) {
    if (results.empty()) throw DataError("no trial results to summarize");
    std::vector<const TrialResult*> ordered;
    for (const auto& r : results) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const TrialResult* a, const TrialResult* b) { return a->config.index < b->config.index; });

    std::vector<std::string> keys;
    std::map<std::string, std::vector<double>> groups;
    for (const auto* r : ordered) {
        const auto key = axis_value(r->config, axis);
        if (!groups.count(key)) keys.push_back(key);
        auto& g = groups[key];
        if (!r->diverged && std::isfinite(r->mae)) g.push_back(r->mae);
    }
    std::vector<BoxStats> out;
    for (const auto& key : keys) {
        auto& values = groups[key];
        if (values.empty()) continue;
        std::sort(values.begin(), values.end());
        out.push_back({key, values.size(), values.front(), quantile(values, 0.25), quantile(values, 0.5),
                       quantile(values, 0.75), values.back()});
    }
    return out;
}

void write_box_stats_csv(const std::filesystem::path& path, std::string_view axis, std::span<const BoxStats> stats) {
    auto out = detail::open_output(path);
    out << "axis,value,n,min,q1,median,q3,max\n";
    for (const auto& s : stats)
        out << axis << ',' << s.axis_value << ',' << s.count << ',' << detail::format_double(s.min) << ','
            << detail::format_double(s.q1) << ',' << detail::format_double(s.median) << ','
            << detail::format_double(s.q3) << ',' << detail::format_double(s.max) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::size_t> default_past_sizes() { return {1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21}; }

std::vector<SweepMember> sweep_past_sizes(const Dataset& data, const std::vector<Channel>& covariates,
                                          std::span<const std::size_t> sizes, const MlpConfig& config,
                                          std::size_t covariate_past, std::size_t horizon, std::size_t jobs) {
    if (sizes.empty()) throw ConfigError("sweep needs at least one past size");
    std::vector<std::optional<SweepMember>> slots(sizes.size());
    std::exception_ptr failure;
    const int threads = static_cast<int>(std::max<std::size_t>(jobs, 1));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        try {
            const auto window = make_window_spec(covariates, sizes[i], covariate_past, horizon);
            std::string id = format_covariate_set(covariates);
            std::replace(id.begin(), id.end(), '+', '_');
            id += "-I" + std::to_string(sizes[i]);
            auto trained = train_model(data, window, config, id);
            SweepMember m;
            m.score = {id, sizes[i], trained.report.best_validation_mae};
            m.model = std::move(trained.model);
            m.report = std::move(trained.report);
            slots[i] = std::move(m);
        } catch (...) {
#pragma omp critical(thermocast_sweep_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<SweepMember> out;
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<MemberScore> member_scores(std::span<const SweepMember> members) {
    std::vector<MemberScore> scores;
    for (const auto& m : members) scores.push_back(m.score);
    return scores;
}

EnsembleModel assemble_ensemble(Strategy strategy, std::span<const SweepMember> members) {
    EnsembleModel e;
    e.spec = build_ensemble(strategy, member_scores(members));
    for (const auto& spec_member : e.spec.members) {
        const auto it = std::find_if(members.begin(), members.end(),
                                     [&](const SweepMember& m) { return m.score.id == spec_member.id; });
        if (it == members.end()) throw DataError("ensemble member " + spec_member.id + " not found");
        e.members.push_back(it->model);
    }
    return e;
}

}  // namespace thermocast
