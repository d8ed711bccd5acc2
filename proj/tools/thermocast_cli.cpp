#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "thermocast/baselines.hpp"
#include "thermocast/error.hpp"
#include "thermocast/manifest.hpp"
#include "thermocast/metrics.hpp"
#include "thermocast/mi.hpp"
#include "thermocast/persistence.hpp"
#include "thermocast/pipeline.hpp"
#include "thermocast/run_config.hpp"
#include "thermocast/search.hpp"
#include "thermocast/synth.hpp"

namespace fs = std::filesystem;
using namespace thermocast;

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    std::string data;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> models;
    std::string split;
    std::string sweep_dir;
    std::string strategy;
    std::optional<std::size_t> days;
    std::optional<std::size_t> bins;
};

// Collects what a command read and wrote, for its manifest.
struct Run {
    std::string command;
    RunConfig config;
    fs::path out;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;  // relative to out
    std::optional<std::uint64_t> seed;

    fs::path output(const fs::path& relative) {
        outputs.push_back(relative);
        return out / relative;
    }

    void finish() {
        std::string text = config.canonical;
        if (seed) text += "\nseed=" + std::to_string(*seed);
        write_manifest(out / ("manifest." + command + ".json"),
                       make_manifest(command, text, inputs, out, outputs, seed));
    }
};

const char* kDefaultConfig = R"({"format": "thermocast-run/1"})";

Run start(const std::string& command, const Options& opt) {
    Run run;
    run.command = command;
    if (!opt.config.empty()) {
        run.config = load_run_config(opt.config);
        run.inputs.push_back(opt.config);
    } else {
        run.config = parse_run_config(kDefaultConfig, fs::current_path());
    }
    if (!opt.data.empty()) {
        const fs::path p(opt.data);
        run.config.data.raw.reset();
        run.config.data.frame.reset();
        // A file written by `ingest` (timestamp plus channel symbols) is a frame.
        std::ifstream in(p);
        std::string header;
        std::getline(in, header);
        if (header.rfind("timestamp,d", 0) == 0)
            run.config.data.frame = p;
        else
            run.config.data.raw = p;
    }
    if (!opt.split.empty()) run.config.split = split_from_name(opt.split);
    run.out = opt.out;
    fs::create_directories(run.out);
    run.seed = opt.seed;
    return run;
}

Dataset dataset(Run& run) { return load_dataset(run.config, &run.inputs); }

std::string id_file(std::string id) { return id + ".json"; }

void write_sweep_scores(const fs::path& path, const std::vector<SweepMember>& members) {
    std::ofstream out(path, std::ios::binary);
    out << "id,past_size,validation_mae,best_epoch,stop\n";
    for (const auto& m : members) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", m.score.validation_mae);
        out << m.score.id << ',' << m.score.past_size << ',' << buf << ',' << m.report.best_epoch << ','
            << stop_reason_name(m.report.stop_reason) << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SweepMember> run_sweep(Run& run, const Dataset& data, std::size_t jobs) {
    auto config = run.config.mlp;
    if (run.seed) config.seed = *run.seed;
    auto members = sweep_past_sizes(data, run.config.window.covariates, run.config.past_sizes, config,
                                    run.config.window.covariate_past, run.config.window.horizon, jobs);
    for (auto& m : members) m.model.window.normalize_target_inputs = run.config.window.normalize_target_inputs;
    return members;
}

std::vector<SweepMember> read_sweep(const fs::path& dir, std::vector<fs::path>& inputs) {
    const auto scores_path = dir / "sweep_scores.csv";
    std::ifstream in(scores_path);
    if (!in) throw IoError("cannot open " + scores_path.string());
    inputs.push_back(scores_path);
    std::string line;
    std::getline(in, line);
    std::vector<SweepMember> members;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string id, past, mae;
        std::getline(row, id, ',');
        std::getline(row, past, ',');
        std::getline(row, mae, ',');
        SweepMember m;
        try {
            m.score = {id, std::stoul(past), std::stod(mae)};
        } catch (const std::exception&) {
            throw DataError("malformed row in " + scores_path.string());
        }
        const auto model_path = dir / "models" / id_file(id);
        auto model = load_model(model_path);
        inputs.push_back(model_path);
        if (!std::holds_alternative<MlpModel>(model)) throw DataError(model_path.string() + " is not an MLP");
        m.model = std::get<MlpModel>(std::move(model));
        members.push_back(std::move(m));
    }
    if (members.empty()) throw DataError(scores_path.string() + " lists no models");
    return members;
}

int cmd_synth(const Options& opt) {
    auto run = start("synth", opt);
    auto config = run.config.synth;
    if (opt.seed) config.seed = *opt.seed;
    if (opt.days) config.days = *opt.days;
    write_raw_csv(run.output("raw.csv"), generate(config), synth_schema());
    run.seed = config.seed;
    run.finish();
    return 0;
}

int cmd_ingest(const Options& opt) {
    auto run = start("ingest", opt);
    const auto& data = run.config.data;
    if (!data.raw) throw ConfigError("data.raw: ingest needs a raw minute-level log (set data.raw or --data)");
    auto loaded = load_csv(*data.raw, data.schema);
    run.inputs.push_back(*data.raw);
    auto result = build_frames(loaded.series, data.ingest);
    if (result.frames.empty()) throw DataError("no usable frame in " + data.raw->string());
    write_frame_csv(run.output("frame.csv"), result.frames.front());
    for (std::size_t i = 1; i < result.frames.size(); ++i)
        write_frame_csv(run.output("frame_" + std::to_string(i) + ".csv"), result.frames[i]);
    auto gaps = loaded.gaps;
    gaps.insert(gaps.end(), result.notes.begin(), result.notes.end());
    write_gap_ledger(run.output("gaps.csv"), gaps);
    run.finish();
    return 0;
}

int cmd_preprocess(const Options& opt) {
    auto run = start("preprocess", opt);
    const auto data = dataset(run);
    const auto window = window_spec(run.config);
    for (auto split : {Split::Train, Split::Validation, Split::Test}) {
        const auto patterns = build_patterns(data.frame, window, data.stats, split_range(data.partition, split));
        write_patterns_csv(run.output("patterns_" + std::string(split_name(split)) + ".csv"), patterns);
    }
    std::ofstream stats(run.output("norm_stats.csv"), std::ios::binary);
    stats << "channel,mean,stddev\n";
    char buf[96];
    for (const auto& [channel, s] : data.stats.channels) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", s.mean, s.stddev);
        stats << channel_symbol(channel) << ',' << buf << '\n';
    }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", data.stats.target_delta.mean, data.stats.target_delta.stddev);
    stats << "delta_d," << buf << '\n';
    stats.close();
    if (!stats) throw IoError("write failed: norm_stats.csv");
    run.finish();
    return 0;
}

int cmd_train(const Options& opt) {
    auto run = start("train", opt);
    const auto data = dataset(run);
    auto config = run.config.mlp;
    if (opt.seed) config.seed = *opt.seed;
    run.seed = config.seed;
    const auto window = window_spec(run.config);
    std::string id = format_covariate_set(window.covariates());
    std::replace(id.begin(), id.end(), '+', '_');
    id += "-I" + std::to_string(window.target_past);
    try {
        const auto trained = train_model(data, window, config, id);
        save_model(run.output("model.json"), trained.model);
        write_train_report_csv(run.output("train_report.csv"), trained.report);
    } catch (const TrainingDiverged& e) {
        write_train_report_csv(run.output("train_report.csv"), e.report());
        run.finish();
        throw;
    }
    run.finish();
    return 0;
}

int cmd_sweep(const Options& opt) {
    auto run = start("sweep", opt);
    const auto data = dataset(run);
    run.seed = opt.seed ? *opt.seed : run.config.mlp.seed;
    const auto members = run_sweep(run, data, opt.jobs);
    for (const auto& m : members) save_model(run.output(fs::path("models") / id_file(m.score.id)), m.model);
    write_sweep_scores(run.output("sweep_scores.csv"), members);
    run.finish();
    return 0;
}

int cmd_ensemble(const Options& opt) {
    auto run = start("ensemble", opt);
    const auto data = dataset(run);
    const Strategy strategy = opt.strategy.empty() ? run.config.strategy : strategy_from_name(opt.strategy);
    std::vector<SweepMember> members;
    if (!opt.sweep_dir.empty()) {
        members = read_sweep(opt.sweep_dir, run.inputs);
    } else {
        run.seed = opt.seed ? *opt.seed : run.config.mlp.seed;
        members = run_sweep(run, data, opt.jobs);
        write_sweep_scores(run.output("sweep_scores.csv"), members);
    }
    const auto model = assemble_ensemble(strategy, members);
    const std::string name = "ensemble_" + std::string(strategy_name(strategy));
    save_model(run.output(name + ".json"), model);
    for (const auto& m : model.spec.members) run.outputs.push_back(name + "." + m.id + ".json");
    run.finish();
    return 0;
}

int cmd_baseline(const Options& opt) {
    auto run = start("baseline", opt);
    const auto data = dataset(run);
    const auto values = training_target(data);
    if (run.config.ets) {
        const auto family = fit_ets_family(values);
        std::ofstream out(run.output("ets_candidates.csv"), std::ios::binary);
        out << "model,alpha,beta,phi,mse,aic,parameters\n";
        char buf[256];
        for (const auto& m : family) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", m.name().c_str(),
                          m.params.alpha, m.params.beta, m.params.phi, m.mse, m.aic, m.parameter_count());
            out << buf;
        }
        out.close();
        if (!out) throw IoError("write failed: ets_candidates.csv");
        save_model(run.output("ets.json"), select_by_aic(family));
    }
    const auto hours = training_hours(data);
    for (auto exog : run.config.arima) {
        const auto model = fit_arima(values, hours, exog);
        if (!model.stationary) std::cerr << "warning: " << model.name() << " fit is not stationary\n";
        std::string file = model.name();
        std::transform(file.begin(), file.end(), file.begin(), [](unsigned char c) { return std::tolower(c); });
        save_model(run.output(file + ".json"), model);
    }
    run.finish();
    return 0;
}

std::vector<ModelReport> evaluate_listed(Run& run, const Options& opt, const Dataset& data) {
    if (opt.models.empty()) throw ConfigError("--model: at least one model file required");
    std::vector<AnyModel> models;
    std::vector<std::string> labels;
    for (const auto& path : opt.models) {
        models.push_back(load_model(path));
        run.inputs.push_back(path);
        labels.push_back(model_label(models.back()));
    }
    return evaluate_models(models, labels, data, run.config.split);
}

int cmd_evaluate(const Options& opt) {
    auto run = start("evaluate", opt);
    const auto data = dataset(run);
    const auto reports = evaluate_listed(run, opt, data);
    write_metrics_csv(run.output("metrics.csv"), reports);
    write_horizon_csv(run.output("horizon.csv"), reports, data.frame.period / 60);
    run.finish();
    return 0;
}

int cmd_report(const Options& opt) {
    auto run = start("report", opt);
    const auto data = dataset(run);
    const auto reports = evaluate_listed(run, opt, data);
    write_comparison_csv(run.output("comparison.csv"), reports);
    write_horizon_csv(run.output("horizon.csv"), reports, data.frame.period / 60);
    run.finish();
    return 0;
}

int cmd_mi(const Options& opt) {
    auto run = start("mi", opt);
    const auto data = dataset(run);
    const std::size_t bins = opt.bins ? *opt.bins : run.config.mi_bins;
    write_mi_csv(run.output("mi.csv"), mi_report(data.frame, bins));
    run.finish();
    return 0;
}

int cmd_gridsearch(const Options& opt) {
    auto run = start("gridsearch", opt);
    const auto data = dataset(run);
    auto grid = run.config.grid;
    if (opt.seed) grid.seeds = {*opt.seed};
    const auto trials = enumerate_grid(grid);
    // The store is resumable and carries wall times, so it stays out of the manifest.
    const auto results = run_grid(grid, trials, data, run.out / "trials.csv", opt.jobs);
    for (const char* axis : {"covariates", "hidden", "learning_rate", "momentum", "weight_decay"})
        write_box_stats_csv(run.output(std::string("box_") + axis + ".csv"), axis, box_stats(results, axis));
    const auto& best = best_trial(results);
    std::ofstream out(run.output("best_trial.csv"), std::ios::binary);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", best.mae, best.rmse, best.smape);
    out << "index,covariates,target_past,hidden,learning_rate,momentum,weight_decay,seed,mae,rmse,smape\n"
        << best.config.index << ',' << format_covariate_set(best.config.covariates) << ','
        << best.config.target_past << ',' << format_hidden_layout(best.config.hidden) << ','
        << best.config.learning_rate << ',' << best.config.momentum << ',' << best.config.weight_decay << ','
        << best.config.seed << ',' << buf << '\n';
    out.close();
    std::size_t diverged = 0;
    for (const auto& r : results) diverged += r.diverged ? 1 : 0;
    std::cerr << results.size() << " trials, " << diverged << " diverged\n";
    run.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Indoor temperature forecasting with MLP ensembles and statistical baselines"};
    app.set_version_flag("--version", THERMOCAST_VERSION);
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_option("--jobs", opt.jobs, "Parallel trials or models")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Seed override");
        sub->add_option("--data", opt.data, "Input data: raw log or ingested frame CSV");
    };

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(const Options&);
    };
    const std::vector<Command> commands{
        {"synth", "Generate a synthetic minute-level house log", cmd_synth},
        {"ingest", "Gap handling and resampling to 15-minute frames", cmd_ingest},
        {"preprocess", "Export supervised windows and normalization stats", cmd_preprocess},
        {"train", "Train one network", cmd_train},
        {"sweep", "Train one network per target past size", cmd_sweep},
        {"ensemble", "Combine a past-size sweep (BEST, COMB-EQ, COMB-EXP)", cmd_ensemble},
        {"baseline", "Fit ETS and ARIMA baselines", cmd_baseline},
        {"evaluate", "Score models on a partition", cmd_evaluate},
        {"mi", "Mutual information of each channel with temperature", cmd_mi},
        {"gridsearch", "Hyperparameter grid with a resumable results store", cmd_gridsearch},
        {"report", "Comparison table and per-horizon curves", cmd_report},
    };
    std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        common(sub);
        subs.emplace_back(sub, c.fn);
        const std::string name = c.name;
        if (name == "synth") sub->add_option("--days", opt.days, "Days to generate");
        if (name == "evaluate" || name == "report") {
            sub->add_option("--model", opt.models, "Model file (repeatable)")->required();
            sub->add_option("--split", opt.split, "train, validation or test");
        }
        if (name == "ensemble") {
            sub->add_option("--sweep", opt.sweep_dir, "Directory written by `sweep`");
            sub->add_option("--strategy", opt.strategy, "BEST, COMB-EQ or COMB-EXP");
        }
        if (name == "mi") sub->add_option("--bins", opt.bins, "Histogram bins per axis");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (auto* sub : app.get_subcommands()) {
            for (const auto& [candidate, fn] : subs) {
                if (candidate != sub) continue;
                if (sub->count("--seed") > 0) opt.seed = seed;
                omp_set_num_threads(static_cast<int>(opt.jobs));
                return fn(opt);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
